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

#include "analog/ablation.hpp"

#include <numeric>
#include <random>
#include <set>

#include "analog/error.hpp"

namespace analog {

namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  // Rejects the low 2^64 mod bound values so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

std::vector<Judgment> judge_all(const Engine& engine, std::span<const std::string> candidates,
                                const Rational& tau) {
  std::vector<Judgment> out;
  out.reserve(candidates.size());
  for (const auto& text : candidates) out.push_back(engine.judge(engine.encode(text), tau));
  return out;
}

AblationStep summarize(std::size_t step, std::vector<PatternId> deleted, const Engine& engine,
                       std::vector<Judgment> judgments) {
  AblationStep s;
  s.step = step;
  s.deleted = std::move(deleted);
  s.remaining_patterns = engine.store().patterns().size();
  Rational sum;
  for (const auto& j : judgments) sum = sum + j.nn_score;
  s.mean_nn_score = sum / static_cast<std::int64_t>(judgments.size());
  for (std::size_t a = 0; a < judgments.size(); ++a) {
    for (std::size_t b = a + 1; b < judgments.size(); ++b) {
      if (judgments[a].candidate.size() != judgments[b].candidate.size()) continue;
      if (compare_judgments(judgments[a], judgments[b]) == Ordering::equal) s.ties.emplace_back(a, b);
    }
  }
  s.judgments = std::move(judgments);
  return s;
}

}  // namespace

std::string_view to_string(AblationMode mode) noexcept {
  return mode == AblationMode::frozen ? "frozen" : "recompute";
}

AblationMode parse_ablation_mode(std::string_view text) {
  if (text == "frozen") return AblationMode::frozen;
  if (text == "recompute") return AblationMode::recompute;
  throw ConfigError("ablation mode must be 'frozen' or 'recompute', got '" + std::string(text) + "'");
}

Engine delete_patterns(const Engine& original, std::span<const PatternId> ids, AblationMode mode) {
  if (mode == AblationMode::frozen) {
    return original.with_support(original.store().without(ids, true));
  }
  return Engine::build(original.store().without(ids, false), original.config());
}

std::vector<std::uint32_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<std::vector<PatternId>> plan_deletions(const PopulationStore& store,
                                                   const AblationConfig& config) {
  validate_tau(config.tau);
  const auto& patterns = store.patterns();
  std::vector<std::vector<PatternId>> plan;

  if (config.random) {
    const auto& r = *config.random;
    if (!(r.fraction > Rational()) || !(r.fraction < Rational(1))) {
      throw ConfigError("deletion fraction must lie in (0, 1), got " + r.fraction.str());
    }
    const auto n = static_cast<std::int64_t>(patterns.size());
    const std::int64_t per_step =
        std::max<std::int64_t>(1, static_cast<std::int64_t>((static_cast<__int128>(r.fraction.num()) * n) /
                                                            r.fraction.den()));
    if (static_cast<std::int64_t>(r.steps) * per_step >= n) {
      throw DataError("empty_population", "deletion schedule of " + std::to_string(r.steps) + " x " +
                                              std::to_string(per_step) + " patterns exhausts the " +
                                              std::to_string(n) + "-pattern corpus");
    }
    const auto perm = seeded_permutation(patterns.size(), r.seed);
    std::size_t next = 0;
    for (std::size_t s = 0; s < r.steps; ++s) {
      std::vector<PatternId> ids;
      for (std::int64_t k = 0; k < per_step; ++k) ids.push_back(patterns[perm[next++]].id);
      plan.push_back(std::move(ids));
    }
    return plan;
  }

  std::set<PatternId> all;
  for (const auto& step : config.explicit_steps) {
    for (PatternId id : step) {
      if (!store.find_pattern(id)) {
        throw DataError("unknown_pattern", "no pattern with id " + std::to_string(id));
      }
      if (!all.insert(id).second) {
        throw ConfigError("pattern " + std::to_string(id) + " is deleted more than once");
      }
    }
    plan.push_back(step);
  }
  if (!patterns.empty() && all.size() >= patterns.size()) {
    throw DataError("empty_population", "deletion plan removes every pattern");
  }
  return plan;
}

AblationReport degradation_curve(const Engine& engine, std::span<const std::string> candidates,
                                 const AblationConfig& config) {
  if (candidates.empty()) throw DataError("precondition", "no candidates to track");
  const auto plan = plan_deletions(engine.store(), config);

  AblationReport report;
  report.config = config;
  report.candidates.assign(candidates.begin(), candidates.end());
  report.steps.push_back(summarize(0, {}, engine, judge_all(engine, candidates, config.tau)));

  std::vector<PatternId> cumulative;
  for (std::size_t s = 0; s < plan.size(); ++s) {
    cumulative.insert(cumulative.end(), plan[s].begin(), plan[s].end());
    const Engine derived = delete_patterns(engine, cumulative, config.mode);
    report.steps.push_back(summarize(s + 1, plan[s], derived, judge_all(derived, candidates, config.tau)));
  }
  return report;
}

}  // namespace analog
