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

#include "analog/acceptability.hpp"

#include <algorithm>
#include <set>

#include "analog/error.hpp"
#include "analog/kernels.hpp"

namespace analog {

namespace {

constexpr std::uint32_t kNoFamily = 0xFFFFFFFFu;

std::uint64_t pack(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Attested sequences of one length, stored column-wise for the slot kernel.
struct Columns {
  std::size_t rows = 0;
  std::vector<std::vector<std::uint32_t>> slots;
  std::vector<PatternId> first_pattern;
};

Columns to_columns(const NgramTable& table, std::size_t n) {
  Columns c;
  c.rows = table.size();
  c.slots.assign(n, std::vector<std::uint32_t>(c.rows));
  c.first_pattern.reserve(c.rows);
  std::size_t j = 0;
  for (const auto& [seq, entry] : table) {
    for (std::size_t s = 0; s < n; ++s) c.slots[s][j] = seq[s];
    c.first_pattern.push_back(entry.first_pattern);
    ++j;
  }
  return c;
}

}  // namespace

struct Engine::Knowledge {
  std::shared_ptr<const PopulationStore> store;
  SimilarityModel model;
  FamilyHierarchy hierarchy;
};

struct Engine::SupportTables {
  std::shared_ptr<const PopulationStore> store;
  std::map<std::size_t, Columns> populations;
  // Per level: packed (family, family) pairs of every attested bigram.
  std::vector<std::unordered_set<std::uint64_t>> family_bigrams;
};

bool Candidate::has_oov() const noexcept {
  return std::any_of(ids.begin(), ids.end(), [](const auto& id) { return !id.has_value(); });
}

std::string Candidate::text() const {
  std::string out;
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    if (i) out += ' ';
    out += surfaces[i];
  }
  return out;
}

std::string_view to_string(Ordering o) noexcept {
  switch (o) {
    case Ordering::more_acceptable:
      return "more_acceptable";
    case Ordering::equal:
      return "equal";
    case Ordering::less_acceptable:
      return "less_acceptable";
  }
  return "equal";
}

void validate_tau(const Rational& tau) {
  if (!(tau > Rational()) || tau > Rational(1)) {
    throw ConfigError("coverage requirement tau must lie in (0, 1], got " + tau.str());
  }
}

Rational parse_tau(std::string_view text) {
  Rational tau;
  if (text == "all") {
    tau = Rational(1);
  } else if (text == "most") {
    tau = Rational(3, 4);
  } else {
    tau = Rational::parse(text);
  }
  validate_tau(tau);
  return tau;
}

Ordering compare_judgments(const Judgment& a, const Judgment& b) {
  if (a.candidate.size() != b.candidate.size()) {
    throw DataError("length_mismatch", "cannot compare candidates of different lengths (" +
                                           std::to_string(a.candidate.size()) + " vs " +
                                           std::to_string(b.candidate.size()) + ")");
  }
  auto level_rank = [](const Judgment& j) {
    return j.level ? *j.level : static_cast<std::size_t>(-1);
  };
  if (level_rank(a) != level_rank(b)) {
    return level_rank(a) < level_rank(b) ? Ordering::more_acceptable : Ordering::less_acceptable;
  }
  if (a.nn_score != b.nn_score) {
    return a.nn_score > b.nn_score ? Ordering::more_acceptable : Ordering::less_acceptable;
  }
  if (a.coverage != b.coverage) {
    return a.coverage > b.coverage ? Ordering::more_acceptable : Ordering::less_acceptable;
  }
  return Ordering::equal;
}

// ------------------------------------------------------------------ Engine

Engine::Engine(std::shared_ptr<const Knowledge> knowledge, std::shared_ptr<const SupportTables> support)
    : knowledge_(std::move(knowledge)), support_(std::move(support)) {}

Engine Engine::build(PopulationStore store, const EngineConfig& config) {
  auto shared = std::make_shared<const PopulationStore>(std::move(store));
  SimilarityModel model(ContextIndex::build(*shared, config.window));
  FamilyHierarchy hierarchy = model.hierarchy(config.schedule);
  auto knowledge = std::make_shared<const Knowledge>(Knowledge{shared, std::move(model), std::move(hierarchy)});
  auto support = make_support(shared, *knowledge);
  return Engine(std::move(knowledge), std::move(support));
}

Engine Engine::assemble(PopulationStore store, ContextIndex index, FamilyHierarchy hierarchy) {
  const std::size_t vocab = store.vocabulary_size();
  if (index.token_count() != vocab) {
    throw DataError("format", "collocation index does not match the vocabulary");
  }
  for (const auto& level : hierarchy.levels()) {
    if (level.family_of.size() != vocab) {
      throw DataError("format", "family hierarchy does not match the vocabulary");
    }
  }
  auto shared = std::make_shared<const PopulationStore>(std::move(store));
  auto knowledge = std::make_shared<const Knowledge>(
      Knowledge{shared, SimilarityModel(std::move(index)), std::move(hierarchy)});
  auto support = make_support(shared, *knowledge);
  return Engine(std::move(knowledge), std::move(support));
}

Engine Engine::with_support(PopulationStore support) const {
  if (support.vocabulary() != knowledge_->store->vocabulary()) {
    throw DataError("format", "support population must share the engine vocabulary");
  }
  return Engine(knowledge_,
                make_support(std::make_shared<const PopulationStore>(std::move(support)), *knowledge_));
}

std::shared_ptr<const Engine::SupportTables> Engine::make_support(
    std::shared_ptr<const PopulationStore> store, const Knowledge& knowledge) {
  auto tables = std::make_shared<SupportTables>();
  tables->store = std::move(store);
  const auto& s = *tables->store;

  std::set<std::size_t> lengths;
  for (const auto& [n, table] : s.ngram_tables()) {
    if (!table.empty()) lengths.insert(n);
  }
  for (const auto& p : s.patterns()) lengths.insert(p.tokens.size());
  for (std::size_t n : lengths) tables->populations.emplace(n, to_columns(s.population(n), n));

  std::set<std::pair<TokenId, TokenId>> bigrams;
  for (const auto& p : s.patterns()) {
    for (std::size_t i = 0; i + 1 < p.tokens.size(); ++i) bigrams.emplace(p.tokens[i], p.tokens[i + 1]);
  }
  const auto& levels = knowledge.hierarchy.levels();
  tables->family_bigrams.resize(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (const auto& [a, b] : bigrams) {
      tables->family_bigrams[l].insert(pack(levels[l].family_of[a], levels[l].family_of[b]));
    }
  }
  return tables;
}

const PopulationStore& Engine::store() const noexcept { return *support_->store; }
const PopulationStore& Engine::knowledge_store() const noexcept { return *knowledge_->store; }
const SimilarityModel& Engine::model() const noexcept { return knowledge_->model; }
const FamilyHierarchy& Engine::hierarchy() const noexcept { return knowledge_->hierarchy; }

EngineConfig Engine::config() const {
  return EngineConfig{knowledge_->model.index().window(), knowledge_->hierarchy.schedule()};
}

Candidate Engine::encode(std::string_view text) const {
  const auto words = knowledge_->store->normalize(text);
  return encode(words);
}

Candidate Engine::encode(std::span<const std::string> surfaces) const {
  Candidate c;
  for (const auto& s : surfaces) {
    c.surfaces.push_back(s);
    c.ids.push_back(knowledge_->store->lookup(s));
  }
  return c;
}

NnResult Engine::nn_score(const Candidate& candidate) const {
  const std::size_t n = candidate.size();
  if (n == 0) throw DataError("precondition", "empty candidate");
  NnResult result;
  auto it = support_->populations.find(n);
  if (it == support_->populations.end() || it->second.rows == 0) {
    result.population_empty = true;
    return result;
  }
  const Columns& cols = it->second;
  const auto& model = knowledge_->model;
  const std::size_t vocab = model.vocabulary_size();

  // Exact similarity values are replaced by their rank among all distinct
  // values in play, so the slot kernel only needs integer min / max.
  std::vector<SimilarityRow> rows(n);
  std::vector<Rational> values{Rational(), Rational(1)};
  for (std::size_t s = 0; s < n; ++s) {
    if (!candidate.ids[s]) continue;
    rows[s] = model.row(*candidate.ids[s]);
    for (std::size_t k = 0; k < rows[s].tokens.size(); ++k) values.push_back(model.value(rows[s], k));
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  auto rank_of = [&](const Rational& v) {
    return static_cast<std::uint32_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin());
  };
  const std::uint32_t zero_rank = rank_of(Rational());
  const std::uint32_t one_rank = rank_of(Rational(1));

  std::vector<std::vector<std::uint32_t>> ranks(n, std::vector<std::uint32_t>(vocab, zero_rank));
  for (std::size_t s = 0; s < n; ++s) {
    if (!candidate.ids[s]) continue;
    for (std::size_t k = 0; k < rows[s].tokens.size(); ++k) {
      ranks[s][rows[s].tokens[k]] = rank_of(model.value(rows[s], k));
    }
    ranks[s][*candidate.ids[s]] = one_rank;
  }

  std::vector<const std::uint32_t*> col_ptrs(n), rank_ptrs(n);
  for (std::size_t s = 0; s < n; ++s) {
    col_ptrs[s] = cols.slots[s].data();
    rank_ptrs[s] = ranks[s].data();
  }
  std::vector<std::uint32_t> mins(cols.rows);
  const std::uint32_t best =
      kernels::active().slot_min(col_ptrs.data(), rank_ptrs.data(), n, cols.rows, mins.data());

  result.score = values[best];
  for (std::size_t j = 0; j < cols.rows; ++j) {
    if (mins[j] != best) continue;
    Support sup;
    sup.pattern = cols.first_pattern[j];
    sup.min_slot = result.score;
    for (std::size_t s = 0; s < n; ++s) {
      sup.tokens.push_back(cols.slots[s][j]);
      sup.slot_similarity.push_back(values[ranks[s][cols.slots[s][j]]]);
    }
    result.supports.push_back(std::move(sup));
  }
  std::sort(result.supports.begin(), result.supports.end(), [](const Support& a, const Support& b) {
    if (a.pattern != b.pattern) return a.pattern < b.pattern;
    return a.tokens < b.tokens;
  });
  return result;
}

std::uint64_t Engine::family_key(const Candidate& c, std::size_t slot, std::size_t level) const {
  const auto& lvl = knowledge_->hierarchy.level(level);
  if (c.ids[slot]) return lvl.family_of[*c.ids[slot]];
  // An unknown token has similarity 0 to everything, so it joins a family
  // only where the threshold is 0 and all tokens form one family.
  if (lvl.threshold && *lvl.threshold == Rational() && !lvl.families.empty()) return 0;
  return kNoFamily;
}

Rational Engine::coverage(const Candidate& candidate, std::size_t level) const {
  const std::size_t n = candidate.size();
  if (n < 2) throw DataError("precondition", "coverage needs a candidate of at least 2 tokens");
  if (level >= knowledge_->hierarchy.level_count()) {
    throw DataError("precondition", "no hierarchy level " + std::to_string(level));
  }
  const auto& attested = support_->family_bigrams[level];
  std::int64_t supported = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto a = family_key(candidate, i, level);
    const auto b = family_key(candidate, i + 1, level);
    if (a == kNoFamily || b == kNoFamily) continue;
    if (attested.count(pack(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)))) ++supported;
  }
  return Rational(supported, static_cast<std::int64_t>(n - 1));
}

std::optional<std::size_t> Engine::acceptability_level(const Candidate& candidate,
                                                       const Rational& tau) const {
  validate_tau(tau);
  for (std::size_t l = 0; l < knowledge_->hierarchy.level_count(); ++l) {
    if (coverage(candidate, l) >= tau) return l;
  }
  return std::nullopt;
}

Judgment Engine::judge(const Candidate& candidate, const Rational& tau) const {
  validate_tau(tau);
  if (candidate.size() < 2) {
    throw DataError("precondition", "candidates need at least 2 tokens to be judged");
  }
  Judgment j;
  j.candidate = candidate;
  NnResult nn = nn_score(candidate);
  j.nn_score = nn.score;
  j.tie = nn.tie();
  j.population_empty = nn.population_empty;
  j.supports = std::move(nn.supports);
  j.level = acceptability_level(candidate, tau);
  j.coverage = coverage(candidate, j.level.value_or(knowledge_->hierarchy.level_count() - 1));
  return j;
}

Ordering Engine::compare(const Candidate& a, const Candidate& b, const Rational& tau) const {
  if (a.size() != b.size()) {
    throw DataError("length_mismatch", "cannot compare candidates of different lengths");
  }
  return compare_judgments(judge(a, tau), judge(b, tau));
}

}  // namespace analog
