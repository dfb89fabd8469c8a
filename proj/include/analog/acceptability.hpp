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

// Acceptability of candidate word sequences, judged against the attested
// population two ways:
//
//  * nearest-neighbor score: the best attested sequence of the same length,
//    where each attested sequence is rated by its weakest slot similarity;
//  * component coverage: the share of the candidate's adjacent bigrams that
//    some attested bigram matches family-for-family at a hierarchy level.
//
// The generality level is the first level whose coverage reaches tau.

#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "analog/corpus_store.hpp"
#include "analog/rational.hpp"
#include "analog/similarity.hpp"

namespace analog {

struct Candidate {
  std::vector<std::string> surfaces;
  std::vector<std::optional<TokenId>> ids;  // nullopt: out of vocabulary

  std::size_t size() const noexcept { return surfaces.size(); }
  bool has_oov() const noexcept;
  std::string text() const;
};

struct Support {
  TokenSeq tokens;
  PatternId pattern = 0;  // lowest id of a pattern containing `tokens`
  std::vector<Rational> slot_similarity;
  Rational min_slot;
  friend bool operator==(const Support&, const Support&) = default;
};

struct NnResult {
  Rational score;
  std::vector<Support> supports;  // every maximizing sequence, by (pattern, tokens)
  bool population_empty = false;
  bool tie() const noexcept { return supports.size() >= 2; }
};

struct Judgment {
  Candidate candidate;
  Rational nn_score;
  std::optional<std::size_t> level;  // nullopt: unsupported at every level
  Rational coverage;                 // at `level`, or at the widest level if unsupported
  std::vector<Support> supports;
  bool tie = false;
  bool population_empty = false;
};

enum class Ordering { more_acceptable, equal, less_acceptable };
std::string_view to_string(Ordering o) noexcept;

/// "all" = 1, "most" = 3/4, or an explicit fraction in (0, 1].
Rational parse_tau(std::string_view text);
void validate_tau(const Rational& tau);

struct EngineConfig {
  std::size_t window = 2;
  Schedule schedule = Schedule::defaults();
  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

/// Lexicographic: level ascending (unsupported last), nn_score descending,
/// coverage descending. Throws DataError("length_mismatch").
Ordering compare_judgments(const Judgment& a, const Judgment& b);

/// Cheap to copy; all state is immutable and shared, so concurrent calls
/// on one engine are safe.
class Engine {
 public:
  /// Builds the collocation index, similarity model and family hierarchy.
  static Engine build(PopulationStore store, const EngineConfig& config = {});

  /// Reassembles an engine from already-built parts (artifact loading).
  /// Throws DataError("format") if the parts disagree in size or window.
  static Engine assemble(PopulationStore store, ContextIndex index, FamilyHierarchy hierarchy);

  /// Keeps this engine's similarity knowledge and families but judges
  /// against `support`, which must share the vocabulary exactly.
  Engine with_support(PopulationStore support) const;

  /// The support population candidates are judged against.
  const PopulationStore& store() const noexcept;
  /// The corpus the similarity knowledge was built from.
  const PopulationStore& knowledge_store() const noexcept;
  const SimilarityModel& model() const noexcept;
  const FamilyHierarchy& hierarchy() const noexcept;
  EngineConfig config() const;

  Candidate encode(std::string_view text) const;
  Candidate encode(std::span<const std::string> surfaces) const;

  /// Throws DataError("precondition") for an empty candidate.
  NnResult nn_score(const Candidate& candidate) const;
  /// Throws DataError("precondition") when shorter than 2 or the level is out of range.
  Rational coverage(const Candidate& candidate, std::size_t level) const;
  std::optional<std::size_t> acceptability_level(const Candidate& candidate,
                                                 const Rational& tau = Rational(1)) const;
  Judgment judge(const Candidate& candidate, const Rational& tau = Rational(1)) const;
  Ordering compare(const Candidate& a, const Candidate& b, const Rational& tau = Rational(1)) const;

 private:
  struct Knowledge;
  struct SupportTables;

  Engine(std::shared_ptr<const Knowledge> knowledge, std::shared_ptr<const SupportTables> support);
  static std::shared_ptr<const SupportTables> make_support(
      std::shared_ptr<const PopulationStore> store, const Knowledge& knowledge);
  std::uint64_t family_key(const Candidate& c, std::size_t slot, std::size_t level) const;

  std::shared_ptr<const Knowledge> knowledge_;
  std::shared_ptr<const SupportTables> support_;
};

}  // namespace analog
