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

// The corpus as a population of attested patterns: one pattern per distinct
// normalized input line, a dense vocabulary and n-gram count tables.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace analog {

using TokenId = std::uint32_t;
using PatternId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

struct IngestConfig {
  bool lowercase = true;
  std::size_t ngram_min = 2;
  std::size_t ngram_max = 5;

  /// Throws ConfigError unless 1 <= ngram_min <= ngram_max.
  void validate() const;
  friend bool operator==(const IngestConfig&, const IngestConfig&) = default;
};

struct Token {
  TokenId id = 0;
  std::string surface;
  friend bool operator==(const Token&, const Token&) = default;
};

struct Pattern {
  PatternId id = 0;
  TokenSeq tokens;
  std::uint64_t count = 0;
  std::vector<std::size_t> source_lines;  // 1-based input line numbers
  friend bool operator==(const Pattern&, const Pattern&) = default;
};

/// One distinct n-gram: its pattern-weighted count and the lowest id of a
/// pattern that contains it.
struct NgramEntry {
  std::uint64_t count = 0;
  PatternId first_pattern = 0;
  friend bool operator==(const NgramEntry&, const NgramEntry&) = default;
};

using NgramTable = std::map<TokenSeq, NgramEntry>;

/// Whitespace tokenization; ASCII case folding when `lowercase`.
std::vector<std::string> tokenize(std::string_view line, bool lowercase);

/// Immutable after construction; safe to share between reader threads.
///
/// Pattern ids are strictly increasing in `patterns()`. A freshly ingested
/// store numbers them 0..N-1 in first-occurrence order; stores derived by
/// deleting patterns keep the surviving patterns' original ids.
class PopulationStore {
 public:
  /// Reads one pattern per line. '#' lines and blank lines are skipped.
  /// Throws DataError("encoding") on invalid UTF-8, naming the line, and
  /// DataError("empty_corpus") when no pattern survives normalization.
  static PopulationStore ingest(std::istream& in, const IngestConfig& config);
  static PopulationStore ingest_text(std::string_view text, const IngestConfig& config);

  /// Assembles a store from already-numbered parts (artifact loading).
  /// Validates ids, surfaces and counts, then recounts the n-gram tables.
  static PopulationStore assemble(std::vector<Token> vocabulary,
                                  std::vector<Pattern> patterns,
                                  const IngestConfig& config);

  /// A new store without the `removed` patterns. With `keep_vocabulary` the
  /// token ids are unchanged (tokens may become unattested); otherwise the
  /// vocabulary is rebuilt from the survivors in first-occurrence order.
  /// Throws DataError("unknown_pattern") for ids not in the store and
  /// DataError("empty_population") when nothing would remain.
  PopulationStore without(std::span<const PatternId> removed, bool keep_vocabulary) const;

  const IngestConfig& config() const noexcept { return config_; }
  const std::vector<Token>& vocabulary() const noexcept { return vocabulary_; }
  std::size_t vocabulary_size() const noexcept { return vocabulary_.size(); }
  const std::vector<Pattern>& patterns() const noexcept { return patterns_; }
  const Pattern* find_pattern(PatternId id) const;

  std::optional<TokenId> lookup(std::string_view surface) const;
  const std::string& surface(TokenId id) const;

  /// Table for length n; an empty table when no pattern reaches n or n is
  /// outside the configured range.
  const NgramTable& ngrams(std::size_t n) const;
  const std::map<std::size_t, NgramTable>& ngram_tables() const noexcept { return ngram_tables_; }

  /// Distinct attested sequences of length n used as the support population:
  /// the n-gram table when n is in range, else the length-n patterns.
  NgramTable population(std::size_t n) const;

  /// Full-pattern multiplicity of `candidate` (0 if not a pattern).
  /// Throws DataError("precondition") on an empty candidate and
  /// DataError("unknown_token") for ids outside the vocabulary.
  std::uint64_t attested(std::span<const TokenId> candidate) const;

  /// Sum over patterns of length * count.
  std::uint64_t total_tokens() const noexcept { return total_tokens_; }

  /// Normalizes a line exactly as ingestion would.
  std::vector<std::string> normalize(std::string_view line) const;

  /// Every pattern rendered as text, repeated `count` times, in id order.
  std::string pattern_text() const;

  std::uint64_t config_fingerprint() const;
  std::uint64_t corpus_fingerprint() const;

  friend bool operator==(const PopulationStore& a, const PopulationStore& b) {
    return a.config_ == b.config_ && a.vocabulary_ == b.vocabulary_ &&
           a.patterns_ == b.patterns_;
  }

 private:
  PopulationStore() = default;
  void index();

  IngestConfig config_;
  std::vector<Token> vocabulary_;
  std::vector<Pattern> patterns_;
  std::unordered_map<std::string, TokenId> surface_ids_;
  std::map<TokenSeq, PatternId> pattern_ids_;
  std::map<std::size_t, NgramTable> ngram_tables_;
  std::uint64_t total_tokens_ = 0;
};

/// 64-bit FNV-1a, used for artifact fingerprints.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace analog
