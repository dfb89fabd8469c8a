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

#include "analog/similarity.hpp"

#include <algorithm>
#include <numeric>

#include "analog/error.hpp"
#include "analog/kernels.hpp"

namespace analog {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

void check_unit_interval(const Rational& theta) {
  if (theta < Rational() || theta > Rational(1)) {
    throw ConfigError("threshold " + theta.str() + " outside [0, 1]");
  }
}

bool fits_kernel(std::uint64_t v) { return v <= kernels::kMaxOperand; }

// Union-find labels for each threshold. Only pairs sharing a feature can
// reach a positive threshold, so the inverted index enumerates all edges.
std::vector<std::vector<std::uint32_t>> threshold_components(const ContextIndex& index,
                                                             std::span<const Rational> thresholds) {
  const std::size_t vocab = index.token_count();
  std::vector<UnionFind> forests;
  forests.reserve(thresholds.size());
  for (std::size_t l = 0; l < thresholds.size(); ++l) forests.emplace_back(vocab);

  std::vector<std::size_t> positive;  // indices of thresholds > 0
  bool kernel_ok = true;
  for (std::size_t l = 0; l < thresholds.size(); ++l) {
    if (thresholds[l] > Rational()) {
      positive.push_back(l);
      kernel_ok = kernel_ok && fits_kernel(static_cast<std::uint64_t>(thresholds[l].num())) &&
                  fits_kernel(static_cast<std::uint64_t>(thresholds[l].den()));
    }
  }
  for (const auto& prof : index.profiles()) kernel_ok = kernel_ok && fits_kernel(prof.mass);

  if (!positive.empty()) {
    const auto& kern = kernels::active();
    std::vector<std::uint64_t> acc(vocab, 0);
    std::vector<TokenId> touched;
    std::vector<std::uint32_t> shared32, mass32;
    std::vector<std::uint8_t> pass;

    for (TokenId a = 0; a < vocab; ++a) {
      const auto& prof = index.contexts_of(a);
      const auto refs = index.feature_indices(a);
      touched.clear();
      for (std::size_t k = 0; k < refs.size(); ++k) {
        const std::uint64_t ca = prof.features[k].count;
        const auto plist = index.postings_at(refs[k]);
        auto it = std::upper_bound(plist.begin(), plist.end(), a,
                                   [](TokenId v, const Posting& p) { return v < p.token; });
        for (; it != plist.end(); ++it) {
          if (acc[it->token] == 0) touched.push_back(it->token);
          acc[it->token] += std::min(ca, it->count);
        }
      }
      if (touched.empty()) continue;

      if (kernel_ok) {
        shared32.resize(touched.size());
        mass32.resize(touched.size());
        pass.resize(touched.size());
        for (std::size_t k = 0; k < touched.size(); ++k) {
          shared32[k] = static_cast<std::uint32_t>(acc[touched[k]]);
          mass32[k] = static_cast<std::uint32_t>(index.contexts_of(touched[k]).mass);
        }
        for (std::size_t l : positive) {
          kern.threshold_pass(shared32.data(), mass32.data(), touched.size(),
                              static_cast<std::uint32_t>(prof.mass),
                              static_cast<std::uint32_t>(thresholds[l].num()),
                              static_cast<std::uint32_t>(thresholds[l].den()), pass.data());
          for (std::size_t k = 0; k < touched.size(); ++k) {
            if (pass[k]) forests[l].unite(a, touched[k]);
          }
        }
      } else {
        for (TokenId b : touched) {
          const std::uint64_t m = acc[b];
          const Rational sim =
              Rational::ratio_or_zero(m, prof.mass + index.contexts_of(b).mass - m);
          for (std::size_t l : positive) {
            if (sim >= thresholds[l]) forests[l].unite(a, b);
          }
        }
      }
      for (TokenId b : touched) acc[b] = 0;
    }
  }

  std::vector<std::vector<std::uint32_t>> labels(thresholds.size());
  for (std::size_t l = 0; l < thresholds.size(); ++l) {
    labels[l].resize(vocab);
    const bool universal = thresholds[l] == Rational();
    for (std::uint32_t t = 0; t < vocab; ++t) labels[l][t] = universal ? 0 : forests[l].find(t);
  }
  return labels;
}

FamilyLevel identity_level(std::size_t vocab) {
  std::vector<std::uint32_t> labels(vocab);
  std::iota(labels.begin(), labels.end(), 0u);
  return partition_from_labels(labels, std::nullopt);
}

}  // namespace

// ---------------------------------------------------------------- Schedule

Schedule::Schedule(std::vector<Rational> thresholds) : thresholds_(std::move(thresholds)) {
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    check_unit_interval(thresholds_[i]);
    if (i > 0 && !(thresholds_[i] < thresholds_[i - 1])) {
      throw ConfigError("threshold schedule must be strictly decreasing: " + str());
    }
  }
}

Schedule Schedule::defaults() {
  return Schedule({Rational(3, 4), Rational(1, 2), Rational(1, 4), Rational(0)});
}

Schedule Schedule::parse(std::string_view text) {
  std::vector<Rational> out;
  std::size_t start = 0;
  bool first = true;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "identity") {
      if (!first) throw ConfigError("'identity' may only lead the schedule");
    } else if (!item.empty()) {
      out.push_back(Rational::parse(item));
    } else if (!text.empty()) {
      throw ConfigError("empty entry in schedule '" + std::string(text) + "'");
    }
    first = false;
    start = comma + 1;
  }
  return Schedule(std::move(out));
}

std::string Schedule::str() const {
  std::string out = "identity";
  for (const auto& t : thresholds_) out += "," + t.str();
  return out;
}

// ------------------------------------------------------------- Hierarchy

FamilyLevel partition_from_labels(std::span<const std::uint32_t> labels,
                                  std::optional<Rational> threshold) {
  FamilyLevel level;
  level.threshold = threshold;
  level.family_of.assign(labels.size(), 0);
  // Tokens are visited in id order, so families are numbered by smallest member.
  std::vector<std::uint32_t> family_by_label;
  std::uint32_t max_label = 0;
  for (auto l : labels) max_label = std::max(max_label, l);
  family_by_label.assign(labels.empty() ? 0 : max_label + 1, UINT32_MAX);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    auto& fam = family_by_label[labels[t]];
    if (fam == UINT32_MAX) {
      fam = static_cast<std::uint32_t>(level.families.size());
      level.families.emplace_back();
    }
    level.family_of[t] = fam;
    level.families[fam].push_back(static_cast<TokenId>(t));
  }
  return level;
}

bool refines(const FamilyLevel& narrow, const FamilyLevel& wide) {
  if (narrow.family_of.size() != wide.family_of.size()) return false;
  for (const auto& fam : narrow.families) {
    for (TokenId t : fam) {
      if (wide.family_of[t] != wide.family_of[fam.front()]) return false;
    }
  }
  return true;
}

FamilyHierarchy FamilyHierarchy::from_levels(std::vector<FamilyLevel> levels) {
  if (levels.empty()) throw DataError("format", "family hierarchy has no levels");
  const std::size_t vocab = levels.front().family_of.size();
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& lvl = levels[l];
    if (lvl.family_of.size() != vocab) {
      throw DataError("format", "level " + std::to_string(l) + " covers a different vocabulary");
    }
    // Must be a canonical partition: rebuild from labels and compare.
    if (partition_from_labels(lvl.family_of, lvl.threshold) != lvl) {
      throw DataError("format", "level " + std::to_string(l) + " is not a canonical partition");
    }
    if (l == 0) {
      if (lvl.threshold || lvl.families.size() != vocab) {
        throw DataError("format", "level 0 must be the identity partition");
      }
      continue;
    }
    if (!lvl.threshold) throw DataError("format", "level " + std::to_string(l) + " lacks a threshold");
    if (l >= 2 && !(*lvl.threshold < *levels[l - 1].threshold)) {
      throw DataError("format", "thresholds must strictly decrease");
    }
    if (!refines(levels[l - 1], lvl)) {
      throw DataError("format", "level " + std::to_string(l) + " is not nested in level " +
                                    std::to_string(l - 1));
    }
  }
  FamilyHierarchy h;
  h.levels_ = std::move(levels);
  return h;
}

Schedule FamilyHierarchy::schedule() const {
  std::vector<Rational> t;
  for (std::size_t l = 1; l < levels_.size(); ++l) t.push_back(*levels_[l].threshold);
  return Schedule(std::move(t));
}

// ------------------------------------------------------------ Similarity

SimilarityModel::SimilarityModel(ContextIndex index) : index_(std::move(index)) {}

Rational SimilarityModel::similarity(TokenId a, TokenId b) const {
  const auto& pa = index_.contexts_of(a);
  const auto& pb = index_.contexts_of(b);
  if (a == b) return Rational(1);
  std::uint64_t mins = 0, maxs = 0;
  auto i = pa.features.begin(), j = pb.features.begin();
  while (i != pa.features.end() || j != pb.features.end()) {
    if (j == pb.features.end() || (i != pa.features.end() && i->feature < j->feature)) {
      maxs += i->count;
      ++i;
    } else if (i == pa.features.end() || j->feature < i->feature) {
      maxs += j->count;
      ++j;
    } else {
      mins += std::min(i->count, j->count);
      maxs += std::max(i->count, j->count);
      ++i;
      ++j;
    }
  }
  return Rational::ratio_or_zero(mins, maxs);
}

SimilarityRow SimilarityModel::row(TokenId a) const {
  const auto& prof = index_.contexts_of(a);
  const auto refs = index_.feature_indices(a);
  SimilarityRow row;
  row.self = a;
  row.self_mass = prof.mass;
  std::vector<std::uint64_t> acc(index_.token_count(), 0);
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const std::uint64_t ca = prof.features[k].count;
    for (const auto& post : index_.postings_at(refs[k])) {
      if (post.token == a) continue;
      if (acc[post.token] == 0) row.tokens.push_back(post.token);
      acc[post.token] += std::min(ca, post.count);
    }
  }
  std::sort(row.tokens.begin(), row.tokens.end());
  row.shared.reserve(row.tokens.size());
  for (TokenId b : row.tokens) row.shared.push_back(acc[b]);
  return row;
}

Rational SimilarityModel::value(const SimilarityRow& row, std::size_t k) const {
  const std::uint64_t m = row.shared[k];
  return Rational::ratio_or_zero(m, row.self_mass + index_.contexts_of(row.tokens[k]).mass - m);
}

std::vector<Neighbor> SimilarityModel::neighbors(TokenId token, const Rational& theta) const {
  check_unit_interval(theta);
  const SimilarityRow r = row(token);
  std::vector<Neighbor> out;
  if (theta == Rational()) {
    std::size_t k = 0;
    for (TokenId b = 0; b < index_.token_count(); ++b) {
      if (b == token) continue;
      if (k < r.tokens.size() && r.tokens[k] == b) {
        out.push_back({b, value(r, k)});
        ++k;
      } else {
        out.push_back({b, Rational()});
      }
    }
  } else {
    for (std::size_t k = 0; k < r.tokens.size(); ++k) {
      Rational s = value(r, k);
      if (s >= theta) out.push_back({r.tokens[k], s});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Neighbor& x, const Neighbor& y) {
    if (x.similarity != y.similarity) return x.similarity > y.similarity;
    return x.token < y.token;
  });
  return out;
}

FamilyLevel SimilarityModel::partition(const Rational& theta) const {
  check_unit_interval(theta);
  const Rational t[] = {theta};
  auto labels = threshold_components(index_, t);
  return partition_from_labels(labels.front(), theta);
}

FamilyHierarchy SimilarityModel::hierarchy(const Schedule& schedule) const {
  std::vector<FamilyLevel> levels;
  levels.push_back(identity_level(index_.token_count()));
  auto labels = threshold_components(index_, schedule.thresholds());
  for (std::size_t l = 0; l < labels.size(); ++l) {
    levels.push_back(partition_from_labels(labels[l], schedule.thresholds()[l]));
  }
  return FamilyHierarchy::from_levels(std::move(levels));
}

}  // namespace analog
