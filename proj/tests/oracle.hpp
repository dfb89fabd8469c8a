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

// Brute-force reference used only by tests. Works on surface strings, never
// on the engine's ids, indexes or kernels: profiles by direct rescan,
// similarity by the formula over the union of keys, families by all-pairs
// BFS, nn_score and coverage by exhaustive loops.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "analog/rational.hpp"

namespace oracle {

using analog::Rational;
using Words = std::vector<std::string>;
using Profile = std::map<std::pair<int, std::string>, std::uint64_t>;
using Family = std::set<std::string>;
using Partition = std::set<Family>;

struct Corpus {
  std::map<Words, std::uint64_t> patterns;  // distinct line -> count
  std::size_t ngram_min = 2;
  std::size_t ngram_max = 5;
};

inline Words split(const std::string& line, bool lowercase = true) {
  std::istringstream in(line);
  Words out;
  std::string w;
  while (in >> w) {
    if (lowercase) {
      for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    out.push_back(w);
  }
  return out;
}

inline Corpus corpus(const std::vector<std::string>& lines) {
  Corpus c;
  for (const auto& l : lines) {
    if (l.empty() || l[0] == '#') continue;
    auto w = split(l);
    if (!w.empty()) ++c.patterns[w];
  }
  return c;
}

inline std::set<std::string> vocabulary(const Corpus& c) {
  std::set<std::string> v;
  for (const auto& [p, n] : c.patterns) v.insert(p.begin(), p.end());
  return v;
}

inline std::map<std::string, Profile> profiles(const Corpus& c, int window) {
  std::map<std::string, Profile> out;
  for (const auto& w : vocabulary(c)) out[w];
  for (const auto& [p, count] : c.patterns) {
    const int len = static_cast<int>(p.size());
    for (int i = 0; i < len; ++i) {
      for (int d = -window; d <= window; ++d) {
        if (d == 0 || i + d < 0 || i + d >= len) continue;
        out[p[i]][{d, p[i + d]}] += count;
      }
    }
  }
  return out;
}

inline Rational similarity(const Profile& a, const Profile& b) {
  std::set<std::pair<int, std::string>> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  std::uint64_t mins = 0, maxs = 0;
  for (const auto& k : keys) {
    const std::uint64_t x = a.count(k) ? a.at(k) : 0;
    const std::uint64_t y = b.count(k) ? b.at(k) : 0;
    mins += std::min(x, y);
    maxs += std::max(x, y);
  }
  return Rational::ratio_or_zero(mins, maxs);
}

/// Word-level similarity with identity short-circuit; unknown words have an
/// empty profile (0 to every other word).
class Sim {
 public:
  Sim(const Corpus& c, int window) : prof_(oracle::profiles(c, window)) {}

  Rational operator()(const std::string& a, const std::string& b) const {
    if (a == b) return Rational(1);
    static const Profile kEmpty;
    auto pa = prof_.find(a), pb = prof_.find(b);
    return similarity(pa == prof_.end() ? kEmpty : pa->second, pb == prof_.end() ? kEmpty : pb->second);
  }

  const std::map<std::string, Profile>& profiles() const { return prof_; }

 private:
  std::map<std::string, Profile> prof_;
};

inline std::set<Words> population(const Corpus& c, std::size_t n) {
  std::set<Words> out;
  const bool in_range = n >= c.ngram_min && n <= c.ngram_max;
  for (const auto& [p, count] : c.patterns) {
    if (!in_range) {
      if (p.size() == n) out.insert(p);
      continue;
    }
    for (std::size_t i = 0; i + n <= p.size(); ++i) out.insert(Words(p.begin() + i, p.begin() + i + n));
  }
  return out;
}

struct NnAnswer {
  Rational score;
  std::set<Words> supports;
  bool empty = false;
};

inline NnAnswer nn_score(const Corpus& c, const Sim& sim, const Words& candidate) {
  NnAnswer ans;
  const auto pop = population(c, candidate.size());
  if (pop.empty()) {
    ans.empty = true;
    return ans;
  }
  bool first = true;
  for (const auto& p : pop) {
    Rational m(1);
    for (std::size_t i = 0; i < candidate.size(); ++i) m = std::min(m, sim(candidate[i], p[i]));
    if (first || m > ans.score) {
      ans.score = m;
      ans.supports = {p};
      first = false;
    } else if (m == ans.score) {
      ans.supports.insert(p);
    }
  }
  return ans;
}

/// Components of the graph sim >= theta over the vocabulary.
inline Partition families(const Corpus& c, const Sim& sim, const Rational& theta) {
  const auto vocab = vocabulary(c);
  std::vector<std::string> words(vocab.begin(), vocab.end());
  std::set<std::string> done;
  Partition out;
  for (const auto& start : words) {
    if (done.count(start)) continue;
    Family fam;
    std::queue<std::string> q;
    q.push(start);
    done.insert(start);
    while (!q.empty()) {
      auto w = q.front();
      q.pop();
      fam.insert(w);
      for (const auto& v : words) {
        if (!done.count(v) && sim(w, v) >= theta) {
          done.insert(v);
          q.push(v);
        }
      }
    }
    out.insert(fam);
  }
  return out;
}

inline Partition identity_partition(const Corpus& c) {
  Partition out;
  for (const auto& w : vocabulary(c)) out.insert(Family{w});
  return out;
}

/// Family of `w` in `part`; unknown words are alone unless `universal`.
inline Family family_of(const Partition& part, const std::string& w, bool universal) {
  for (const auto& f : part) {
    if (f.count(w)) return f;
  }
  if (universal && !part.empty()) return *part.begin();
  return Family{w};
}

inline Rational coverage(const Corpus& c, const Partition& part, bool universal, const Words& cand) {
  std::set<std::pair<std::string, std::string>> bigrams;
  for (const auto& [p, n] : c.patterns) {
    for (std::size_t i = 0; i + 1 < p.size(); ++i) bigrams.emplace(p[i], p[i + 1]);
  }
  std::int64_t ok = 0;
  for (std::size_t i = 0; i + 1 < cand.size(); ++i) {
    const Family fa = family_of(part, cand[i], universal);
    const Family fb = family_of(part, cand[i + 1], universal);
    const bool known_a = vocabulary(c).count(cand[i]) || universal;
    const bool known_b = vocabulary(c).count(cand[i + 1]) || universal;
    if (!known_a || !known_b) continue;
    for (const auto& [a, b] : bigrams) {
      if (fa.count(a) && fb.count(b)) {
        ++ok;
        break;
      }
    }
  }
  return Rational(ok, static_cast<std::int64_t>(cand.size() - 1));
}

}  // namespace oracle
