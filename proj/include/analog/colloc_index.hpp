// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "analog/corpus_store.hpp"

namespace analog {

/// A neighbor token seen at a signed offset (never 0, |offset| <= window).
struct ContextFeature {
  std::int32_t offset = 0;
  TokenId neighbor = 0;
  friend auto operator<=>(const ContextFeature&, const ContextFeature&) = default;
};

struct FeatureCount {
  ContextFeature feature;
  std::uint64_t count = 0;
  friend bool operator==(const FeatureCount&, const FeatureCount&) = default;
};

/// Collocational profile of one token, features sorted ascending.
struct ContextProfile {
  TokenId token = 0;
  std::vector<FeatureCount> features;
  std::uint64_t mass = 0;  // sum of feature counts

  friend bool operator==(const ContextProfile&, const ContextProfile&) = default;
};

struct Posting {
  TokenId token = 0;
  std::uint64_t count = 0;
  friend bool operator==(const Posting&, const Posting&) = default;
};

/// Positional collocation profiles plus their transpose (feature -> tokens).
/// Contexts never cross pattern boundaries. Immutable once built.
class ContextIndex {
 public:
  /// Throws ConfigError if window == 0.
  static ContextIndex build(const PopulationStore& store, std::size_t window);

  std::size_t window() const noexcept { return window_; }
  std::size_t token_count() const noexcept { return profiles_.size(); }

  /// Throws DataError("unknown_token") for ids outside the vocabulary.
  const ContextProfile& contexts_of(TokenId token) const;
  std::span<const ContextProfile> profiles() const noexcept { return profiles_; }

  std::size_t feature_count() const noexcept { return features_.size(); }
  const ContextFeature& feature(std::size_t index) const { return features_[index]; }
  /// Sorted by token id; empty when the feature never occurs.
  std::span<const Posting> postings(const ContextFeature& feature) const;
  std::span<const Posting> postings_at(std::size_t feature_index) const;
  /// Feature-table indices of `token`'s profile entries, parallel to
  /// contexts_of(token).features.
  std::span<const std::uint32_t> feature_indices(TokenId token) const;

  friend bool operator==(const ContextIndex& a, const ContextIndex& b) {
    return a.window_ == b.window_ && a.profiles_ == b.profiles_;
  }

 private:
  std::size_t window_ = 0;
  std::vector<ContextProfile> profiles_;
  std::vector<std::vector<std::uint32_t>> profile_features_;
  std::vector<ContextFeature> features_;
  std::vector<std::size_t> posting_offsets_;  // CSR, size features_ + 1
  std::vector<Posting> postings_;
};

}  // namespace analog
