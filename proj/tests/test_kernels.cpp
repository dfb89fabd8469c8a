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

#include <doctest.h>

#include <random>
#include <vector>

#include "analog/kernels.hpp"

using namespace analog::kernels;

namespace {

// Straight from the definition, in 128-bit arithmetic.
bool reference_pass(std::uint64_t s, std::uint64_t o, std::uint64_t self, std::uint64_t p, std::uint64_t q) {
  if (p == 0) return true;
  if (s == 0) return false;
  return static_cast<unsigned __int128>(s) * q >= static_cast<unsigned __int128>(p) * (self + o - s);
}

}  // namespace

TEST_CASE("threshold_pass: scalar matches the definition and every ISA matches scalar") {
  std::mt19937_64 rng(11);
  const std::uint32_t edge[] = {0, 1, 2, 3, 7, 1000, kMaxOperand - 1, kMaxOperand};
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = rng() % 70;
    const bool huge = trial % 4 == 0;
    const std::uint32_t limit = huge ? kMaxOperand : 50;
    std::uint32_t self = static_cast<std::uint32_t>(rng() % (limit + 1ull));
    if (trial % 17 == 0) self = edge[rng() % 8];
    std::vector<std::uint32_t> other(n), shared(n);
    for (std::size_t i = 0; i < n; ++i) {
      other[i] = static_cast<std::uint32_t>(rng() % (limit + 1ull));
      const std::uint32_t cap = std::min(self, other[i]);
      shared[i] = static_cast<std::uint32_t>(rng() % (cap + 1ull));
      if (i % 5 == 0) shared[i] = cap;
    }
    std::uint32_t q = 1 + static_cast<std::uint32_t>(rng() % (huge ? kMaxOperand : 8));
    std::uint32_t p = static_cast<std::uint32_t>(rng() % (q + 1ull));
    if (trial % 9 == 0) p = 0;

    std::vector<std::uint8_t> want(n), got(n);
    scalar::threshold_pass(shared.data(), other.data(), n, self, p, q, want.data());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(static_cast<bool>(want[i]) == reference_pass(shared[i], other[i], self, p, q));
    }
    for (Isa isa : {Isa::scalar, Isa::avx2}) {
      if (!supported(isa)) continue;
      std::fill(got.begin(), got.end(), 7);
      for_isa(isa).threshold_pass(shared.data(), other.data(), n, self, p, q, got.data());
      CHECK(got == want);
    }
  }
}

TEST_CASE("slot_min: every ISA matches scalar") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t slots = 1 + rng() % 6;
    const std::size_t rows = rng() % 90;
    std::vector<std::vector<std::uint32_t>> ranks(slots), cols(slots);
    std::vector<const std::uint32_t*> rp(slots), cp(slots);
    for (std::size_t s = 0; s < slots; ++s) {
      const std::size_t vocab = 1 + rng() % 40;
      for (std::size_t v = 0; v < vocab; ++v) {
        ranks[s].push_back(static_cast<std::uint32_t>(trial % 3 == 0 ? rng() % 0x80000000u : rng() % 9));
      }
      for (std::size_t r = 0; r < rows; ++r) cols[s].push_back(static_cast<std::uint32_t>(rng() % vocab));
      rp[s] = ranks[s].data();
      cp[s] = cols[s].data();
    }
    std::vector<std::uint32_t> want(rows), got(rows);
    const std::uint32_t want_max = scalar::slot_min(cp.data(), rp.data(), slots, rows, want.data());
    std::uint32_t expect_max = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      std::uint32_t m = UINT32_MAX;
      for (std::size_t s = 0; s < slots; ++s) m = std::min(m, ranks[s][cols[s][r]]);
      CHECK(want[r] == m);
      expect_max = std::max(expect_max, m);
    }
    CHECK(want_max == expect_max);
    for (Isa isa : {Isa::scalar, Isa::avx2}) {
      if (!supported(isa)) continue;
      std::fill(got.begin(), got.end(), 0xdeadbeef);
      CHECK(for_isa(isa).slot_min(cp.data(), rp.data(), slots, rows, got.data()) == want_max);
      CHECK(got == want);
    }
  }
}

TEST_CASE("dispatch table") {
  CHECK(supported(Isa::scalar));
  CHECK(for_isa(Isa::scalar).isa == Isa::scalar);
  CHECK(supported(active().isa));
  CHECK(name(Isa::avx2) == "avx2");
  if (!supported(Isa::avx2)) CHECK_THROWS(for_isa(Isa::avx2));
}
