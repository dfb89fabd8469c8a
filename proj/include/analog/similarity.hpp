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

// Token similarity from shared collocational contexts, and the nested
// family hierarchy obtained by thresholding it at a decreasing schedule.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "analog/colloc_index.hpp"
#include "analog/rational.hpp"

namespace analog {

/// Thresholds for levels 1..L. Level 0 is always the identity partition and
/// is not listed. Strictly decreasing, each within [0, 1].
class Schedule {
 public:
  Schedule() = default;
  /// Throws ConfigError unless strictly decreasing and within [0, 1].
  explicit Schedule(std::vector<Rational> thresholds);

  /// identity, 3/4, 1/2, 1/4, 0
  static Schedule defaults();
  /// Comma separated, e.g. "identity,3/4,1/2,0"; the leading "identity" is optional.
  static Schedule parse(std::string_view text);

  const std::vector<Rational>& thresholds() const noexcept { return thresholds_; }
  std::size_t level_count() const noexcept { return thresholds_.size() + 1; }
  std::string str() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  std::vector<Rational> thresholds_;
};

/// One partition of the vocabulary. Families are sorted member lists,
/// ordered by their smallest member; family_of[t] indexes into families.
struct FamilyLevel {
  std::optional<Rational> threshold;  // nullopt for the identity level
  std::vector<std::uint32_t> family_of;
  std::vector<std::vector<TokenId>> families;

  friend bool operator==(const FamilyLevel&, const FamilyLevel&) = default;
};

/// Canonical partition from arbitrary per-token labels (equal label = same family).
FamilyLevel partition_from_labels(std::span<const std::uint32_t> labels,
                                  std::optional<Rational> threshold);

class FamilyHierarchy {
 public:
  FamilyHierarchy() = default;
  /// Validates: level 0 is the identity partition, every level partitions
  /// the same vocabulary, thresholds strictly decrease, and each level is a
  /// union of families of the previous one. Throws DataError("format").
  static FamilyHierarchy from_levels(std::vector<FamilyLevel> levels);

  std::size_t level_count() const noexcept { return levels_.size(); }
  const FamilyLevel& level(std::size_t l) const { return levels_.at(l); }
  const std::vector<FamilyLevel>& levels() const noexcept { return levels_; }
  Schedule schedule() const;

  friend bool operator==(const FamilyHierarchy&, const FamilyHierarchy&) = default;

 private:
  std::vector<FamilyLevel> levels_;
};

/// True when every family of `wide` is a disjoint union of families of `narrow`.
bool refines(const FamilyLevel& narrow, const FamilyLevel& wide);

struct Neighbor {
  TokenId token = 0;
  Rational similarity;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Shared feature mass between one token and every token that has at least
/// one feature in common with it (ascending ids, self excluded).
struct SimilarityRow {
  TokenId self = 0;
  std::uint64_t self_mass = 0;
  std::vector<TokenId> tokens;
  std::vector<std::uint64_t> shared;
};

/// Count-weighted Jaccard over context profiles:
///   sim(a, b) = sum_f min(c_a(f), c_b(f)) / sum_f max(c_a(f), c_b(f)),
/// sim(a, a) = 1 and 0 when both profiles are empty.
class SimilarityModel {
 public:
  explicit SimilarityModel(ContextIndex index);

  const ContextIndex& index() const noexcept { return index_; }
  std::size_t vocabulary_size() const noexcept { return index_.token_count(); }

  /// Direct merge of the two sorted profiles. Throws DataError("unknown_token").
  Rational similarity(TokenId a, TokenId b) const;

  /// Inverted-index accumulation; the same values as similarity(), row-wise.
  SimilarityRow row(TokenId a) const;
  Rational value(const SimilarityRow& row, std::size_t k) const;

  /// Tokens b != token with sim >= theta, by descending similarity then id.
  /// At theta = 0 that is the whole vocabulary minus `token`.
  std::vector<Neighbor> neighbors(TokenId token, const Rational& theta) const;

  /// Connected components of the graph with edges sim(a, b) >= theta.
  FamilyLevel partition(const Rational& theta) const;
  FamilyHierarchy hierarchy(const Schedule& schedule) const;

 private:
  ContextIndex index_;
};

}  // namespace analog
