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

#include "analog/colloc_index.hpp"

#include <algorithm>
#include <tuple>

#include "analog/error.hpp"

namespace analog {

namespace {

struct Occurrence {
  TokenId token;
  ContextFeature feature;
  std::uint64_t count;
};

}  // namespace

ContextIndex ContextIndex::build(const PopulationStore& store, std::size_t window) {
  if (window == 0) throw ConfigError("context window must be >= 1");
  const auto w = static_cast<std::ptrdiff_t>(window);

  std::vector<Occurrence> occ;
  occ.reserve(static_cast<std::size_t>(store.total_tokens()) * 2 * window);
  for (const auto& p : store.patterns()) {
    const auto len = static_cast<std::ptrdiff_t>(p.tokens.size());
    for (std::ptrdiff_t i = 0; i < len; ++i) {
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - w);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len - 1, i + w);
      for (std::ptrdiff_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        occ.push_back({p.tokens[static_cast<std::size_t>(i)],
                       {static_cast<std::int32_t>(j - i), p.tokens[static_cast<std::size_t>(j)]},
                       p.count});
      }
    }
  }

  // (token, feature) order gives profiles directly.
  std::sort(occ.begin(), occ.end(), [](const Occurrence& a, const Occurrence& b) {
    return std::tie(a.token, a.feature) < std::tie(b.token, b.feature);
  });

  ContextIndex index;
  index.window_ = window;
  const std::size_t vocab = store.vocabulary_size();
  index.profiles_.resize(vocab);
  for (std::size_t t = 0; t < vocab; ++t) index.profiles_[t].token = static_cast<TokenId>(t);
  for (const auto& o : occ) {
    auto& prof = index.profiles_[o.token];
    if (!prof.features.empty() && prof.features.back().feature == o.feature) {
      prof.features.back().count += o.count;
    } else {
      prof.features.push_back({o.feature, o.count});
    }
    prof.mass += o.count;
  }
  occ.clear();
  occ.shrink_to_fit();

  std::vector<ContextFeature> all;
  for (const auto& prof : index.profiles_) {
    for (const auto& fc : prof.features) all.push_back(fc.feature);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  index.features_ = std::move(all);

  const std::size_t nf = index.features_.size();
  std::vector<std::size_t> sizes(nf, 0);
  index.profile_features_.resize(vocab);
  for (const auto& prof : index.profiles_) {
    auto& refs = index.profile_features_[prof.token];
    refs.reserve(prof.features.size());
    for (const auto& fc : prof.features) {
      auto it = std::lower_bound(index.features_.begin(), index.features_.end(), fc.feature);
      const auto fi = static_cast<std::uint32_t>(it - index.features_.begin());
      refs.push_back(fi);
      ++sizes[fi];
    }
  }
  index.posting_offsets_.assign(nf + 1, 0);
  for (std::size_t f = 0; f < nf; ++f) index.posting_offsets_[f + 1] = index.posting_offsets_[f] + sizes[f];
  index.postings_.resize(index.posting_offsets_[nf]);
  std::vector<std::size_t> cursor(index.posting_offsets_.begin(), index.posting_offsets_.end() - 1);
  // Tokens visited in id order, so every posting list comes out sorted.
  for (const auto& prof : index.profiles_) {
    const auto& refs = index.profile_features_[prof.token];
    for (std::size_t k = 0; k < refs.size(); ++k) {
      index.postings_[cursor[refs[k]]++] = Posting{prof.token, prof.features[k].count};
    }
  }
  return index;
}

const ContextProfile& ContextIndex::contexts_of(TokenId token) const {
  if (token >= profiles_.size()) {
    throw DataError("unknown_token", "unknown token id " + std::to_string(token));
  }
  return profiles_[token];
}

std::span<const Posting> ContextIndex::postings(const ContextFeature& feature) const {
  auto it = std::lower_bound(features_.begin(), features_.end(), feature);
  if (it == features_.end() || *it != feature) return {};
  return postings_at(static_cast<std::size_t>(it - features_.begin()));
}

std::span<const Posting> ContextIndex::postings_at(std::size_t feature_index) const {
  return std::span<const Posting>(postings_).subspan(
      posting_offsets_[feature_index],
      posting_offsets_[feature_index + 1] - posting_offsets_[feature_index]);
}

std::span<const std::uint32_t> ContextIndex::feature_indices(TokenId token) const {
  if (token >= profile_features_.size()) {
    throw DataError("unknown_token", "unknown token id " + std::to_string(token));
  }
  return profile_features_[token];
}

}  // namespace analog
