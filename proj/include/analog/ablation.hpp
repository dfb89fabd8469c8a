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

// Pattern deletion experiments: remove attested patterns and watch the
// judgments of a fixed candidate set degrade.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "analog/acceptability.hpp"

namespace analog {

/// frozen: similarity tables and families stay as built from the full
/// corpus, only the support population shrinks (scores can only drop).
/// recompute: everything is rebuilt from the reduced corpus.
enum class AblationMode { frozen, recompute };

std::string_view to_string(AblationMode mode) noexcept;
AblationMode parse_ablation_mode(std::string_view text);

/// Derives a new engine without the given patterns; `original` is untouched.
/// Ids refer to `original.store()`.
Engine delete_patterns(const Engine& original, std::span<const PatternId> ids, AblationMode mode);

/// Each step removes floor(fraction * N) patterns (at least one) taken in
/// order from a seeded shuffle of all pattern ids.
struct RandomDeletion {
  Rational fraction;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
};

struct AblationConfig {
  std::vector<std::vector<PatternId>> explicit_steps;  // used when `random` is unset
  std::optional<RandomDeletion> random;
  AblationMode mode = AblationMode::frozen;
  Rational tau{1};
};

/// Seeded permutation of [0, n): std::mt19937_64 output, unbiased bounded
/// draws by rejection, Fisher-Yates from the back. Portable bit for bit.
std::vector<std::uint32_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// Pattern ids removed at each step (not cumulative). Validates the whole
/// plan up front: throws ConfigError for a bad fraction, DataError
/// ("unknown_pattern") for ids not in the store, and DataError
/// ("empty_population") if the plan would delete every pattern.
std::vector<std::vector<PatternId>> plan_deletions(const PopulationStore& store,
                                                   const AblationConfig& config);

struct AblationStep {
  std::size_t step = 0;
  std::vector<PatternId> deleted;  // removed at this step
  std::size_t remaining_patterns = 0;
  std::vector<Judgment> judgments;  // parallel to the candidate list
  /// Candidate index pairs (i < j) whose judgments compare equal.
  std::vector<std::pair<std::size_t, std::size_t>> ties;
  Rational mean_nn_score;
};

struct AblationReport {
  AblationConfig config;
  std::vector<std::string> candidates;
  std::vector<AblationStep> steps;  // step 0 is the unablated engine
};

/// Throws DataError("precondition") if `candidates` is empty.
AblationReport degradation_curve(const Engine& engine, std::span<const std::string> candidates,
                                 const AblationConfig& config);

}  // namespace analog
