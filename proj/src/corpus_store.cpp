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

#include "analog/corpus_store.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <set>
#include <sstream>

#include "analog/error.hpp"

namespace analog {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Strict UTF-8 check: rejects overlongs, surrogates and code points past U+10FFFF.
bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

std::string join_surfaces(const PopulationStore& store, const TokenSeq& tokens) {
  std::string line;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) line += ' ';
    line += store.surface(tokens[i]);
  }
  return line;
}

}  // namespace

void IngestConfig::validate() const {
  if (ngram_min < 1 || ngram_min > ngram_max) {
    throw ConfigError("n-gram range must satisfy 1 <= n_min <= n_max, got [" +
                      std::to_string(ngram_min) + ", " + std::to_string(ngram_max) + "]");
  }
}

std::vector<std::string> tokenize(std::string_view line, bool lowercase) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) {
      std::string word(line.substr(start, i - start));
      if (lowercase) {
        for (char& c : word) {
          if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        }
      }
      out.push_back(std::move(word));
    }
  }
  return out;
}

PopulationStore PopulationStore::ingest(std::istream& in, const IngestConfig& config) {
  config.validate();
  PopulationStore store;
  store.config_ = config;

  std::map<TokenSeq, PatternId> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!valid_utf8(line)) {
      throw DataError("encoding", "invalid UTF-8 on line " + std::to_string(line_no));
    }
    std::size_t first = 0;
    while (first < line.size() && is_space(line[first])) ++first;
    if (first < line.size() && line[first] == '#') continue;

    auto words = tokenize(line, config.lowercase);
    if (words.empty()) continue;

    TokenSeq seq;
    seq.reserve(words.size());
    for (auto& w : words) {
      auto [it, inserted] =
          store.surface_ids_.try_emplace(w, static_cast<TokenId>(store.vocabulary_.size()));
      if (inserted) store.vocabulary_.push_back(Token{it->second, w});
      seq.push_back(it->second);
    }
    auto [it, inserted] = seen.try_emplace(seq, static_cast<PatternId>(store.patterns_.size()));
    if (inserted) {
      store.patterns_.push_back(Pattern{it->second, std::move(seq), 1, {line_no}});
    } else {
      auto& p = store.patterns_[it->second];
      ++p.count;
      p.source_lines.push_back(line_no);
    }
  }
  if (store.patterns_.empty()) {
    throw DataError("empty_corpus", "empty corpus: no patterns after normalization");
  }
  store.index();
  return store;
}

PopulationStore PopulationStore::ingest_text(std::string_view text, const IngestConfig& config) {
  std::istringstream in{std::string(text)};
  return ingest(in, config);
}

PopulationStore PopulationStore::assemble(std::vector<Token> vocabulary,
                                          std::vector<Pattern> patterns,
                                          const IngestConfig& config) {
  config.validate();
  if (patterns.empty()) throw DataError("empty_population", "store has no patterns");
  PopulationStore store;
  store.config_ = config;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    auto& t = vocabulary[i];
    if (t.id != i) throw DataError("format", "token ids are not contiguous at " + std::to_string(i));
    if (t.surface.empty() || !valid_utf8(t.surface)) {
      throw DataError("format", "bad surface for token " + std::to_string(i));
    }
    if (!store.surface_ids_.emplace(t.surface, t.id).second) {
      throw DataError("format", "duplicate surface '" + t.surface + "'");
    }
  }
  std::set<TokenSeq> distinct;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const auto& p = patterns[i];
    if (i > 0 && p.id <= patterns[i - 1].id) {
      throw DataError("format", "pattern ids must be strictly increasing");
    }
    if (p.tokens.empty() || p.count == 0) {
      throw DataError("format", "pattern " + std::to_string(p.id) + " is empty or has zero count");
    }
    for (TokenId t : p.tokens) {
      if (t >= vocabulary.size()) {
        throw DataError("format", "pattern " + std::to_string(p.id) + " references unknown token");
      }
    }
    if (!distinct.insert(p.tokens).second) {
      throw DataError("format", "pattern " + std::to_string(p.id) + " duplicates another pattern");
    }
  }
  store.vocabulary_ = std::move(vocabulary);
  store.patterns_ = std::move(patterns);
  store.index();
  return store;
}

PopulationStore PopulationStore::without(std::span<const PatternId> removed,
                                         bool keep_vocabulary) const {
  std::set<PatternId> drop;
  for (PatternId id : removed) {
    if (!find_pattern(id)) {
      throw DataError("unknown_pattern", "no pattern with id " + std::to_string(id));
    }
    drop.insert(id);
  }
  if (drop.size() == patterns_.size()) {
    throw DataError("empty_population", "deleting every pattern leaves an empty population");
  }

  PopulationStore out;
  out.config_ = config_;
  if (keep_vocabulary) {
    out.vocabulary_ = vocabulary_;
    out.surface_ids_ = surface_ids_;
    for (const auto& p : patterns_) {
      if (!drop.count(p.id)) out.patterns_.push_back(p);
    }
  } else {
    std::vector<TokenId> remap(vocabulary_.size(), static_cast<TokenId>(-1));
    for (const auto& p : patterns_) {
      if (drop.count(p.id)) continue;
      Pattern copy = p;
      for (TokenId& t : copy.tokens) {
        if (remap[t] == static_cast<TokenId>(-1)) {
          remap[t] = static_cast<TokenId>(out.vocabulary_.size());
          out.vocabulary_.push_back(Token{remap[t], vocabulary_[t].surface});
          out.surface_ids_.emplace(vocabulary_[t].surface, remap[t]);
        }
        t = remap[t];
      }
      out.patterns_.push_back(std::move(copy));
    }
  }
  out.index();
  return out;
}

void PopulationStore::index() {
  pattern_ids_.clear();
  ngram_tables_.clear();
  total_tokens_ = 0;
  for (const auto& p : patterns_) {
    pattern_ids_.emplace(p.tokens, p.id);
    total_tokens_ += p.tokens.size() * p.count;
    const std::size_t top = std::min(config_.ngram_max, p.tokens.size());
    for (std::size_t n = config_.ngram_min; n <= top; ++n) {
      auto& table = ngram_tables_[n];
      for (std::size_t i = 0; i + n <= p.tokens.size(); ++i) {
        TokenSeq key(p.tokens.begin() + static_cast<std::ptrdiff_t>(i),
                     p.tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
        auto [it, inserted] = table.try_emplace(std::move(key), NgramEntry{0, p.id});
        it->second.count += p.count;
      }
    }
  }
}

const Pattern* PopulationStore::find_pattern(PatternId id) const {
  auto it = std::lower_bound(patterns_.begin(), patterns_.end(), id,
                             [](const Pattern& p, PatternId v) { return p.id < v; });
  if (it == patterns_.end() || it->id != id) return nullptr;
  return &*it;
}

std::optional<TokenId> PopulationStore::lookup(std::string_view surface) const {
  auto it = surface_ids_.find(std::string(surface));
  if (it == surface_ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& PopulationStore::surface(TokenId id) const {
  if (id >= vocabulary_.size()) {
    throw DataError("unknown_token", "unknown token id " + std::to_string(id));
  }
  return vocabulary_[id].surface;
}

const NgramTable& PopulationStore::ngrams(std::size_t n) const {
  static const NgramTable kEmpty;
  auto it = ngram_tables_.find(n);
  return it == ngram_tables_.end() ? kEmpty : it->second;
}

NgramTable PopulationStore::population(std::size_t n) const {
  if (n >= config_.ngram_min && n <= config_.ngram_max) return ngrams(n);
  NgramTable table;
  for (const auto& p : patterns_) {
    if (p.tokens.size() == n) table.emplace(p.tokens, NgramEntry{p.count, p.id});
  }
  return table;
}

std::uint64_t PopulationStore::attested(std::span<const TokenId> candidate) const {
  if (candidate.empty()) throw DataError("precondition", "empty candidate");
  for (TokenId t : candidate) {
    if (t >= vocabulary_.size()) {
      throw DataError("unknown_token", "unknown token id " + std::to_string(t));
    }
  }
  auto it = pattern_ids_.find(TokenSeq(candidate.begin(), candidate.end()));
  if (it == pattern_ids_.end()) return 0;
  return find_pattern(it->second)->count;
}

std::vector<std::string> PopulationStore::normalize(std::string_view line) const {
  return tokenize(line, config_.lowercase);
}

std::string PopulationStore::pattern_text() const {
  std::string out;
  for (const auto& p : patterns_) {
    const std::string line = join_surfaces(*this, p.tokens);
    for (std::uint64_t k = 0; k < p.count; ++k) {
      out += line;
      out += '\n';
    }
  }
  return out;
}

std::uint64_t PopulationStore::config_fingerprint() const {
  std::ostringstream s;
  s << "lowercase=" << config_.lowercase << ";ngram_min=" << config_.ngram_min
    << ";ngram_max=" << config_.ngram_max;
  return fnv1a64(s.str());
}

std::uint64_t PopulationStore::corpus_fingerprint() const {
  std::uint64_t h = fnv1a64("");
  for (const auto& p : patterns_) {
    const std::string rec =
        std::to_string(p.id) + '\t' + std::to_string(p.count) + '\t' + join_surfaces(*this, p.tokens) + '\n';
    h = fnv1a64(rec, h);
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace analog
