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

#include "analog/kernels.hpp"

#if defined(ANALOG_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <algorithm>
#include <limits>

#define ANALOG_AVX2 __attribute__((target("avx2")))

namespace analog::kernels::avx2 {

ANALOG_AVX2
void threshold_pass(const std::uint32_t* shared, const std::uint32_t* other_mass, std::size_t n,
                    std::uint32_t self_mass, std::uint32_t p, std::uint32_t q, std::uint8_t* pass) {
  if (p == 0) {
    std::fill(pass, pass + n, std::uint8_t{1});
    return;
  }
  const __m256i self = _mm256_set1_epi32(static_cast<int>(self_mass));
  const __m256i pv = _mm256_set1_epi64x(p);
  const __m256i qv = _mm256_set1_epi64x(q);
  const __m256i zero = _mm256_setzero_si256();

  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(shared + i));
    const __m256i o = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(other_mass + i));
    const __m256i den = _mm256_sub_epi32(_mm256_add_epi32(self, o), s);

    // 32x32->64 products on even lanes, then on odd lanes shifted down.
    const __m256i lhs_even = _mm256_mul_epu32(s, qv);
    const __m256i rhs_even = _mm256_mul_epu32(den, pv);
    const __m256i lhs_odd = _mm256_mul_epu32(_mm256_srli_epi64(s, 32), qv);
    const __m256i rhs_odd = _mm256_mul_epu32(_mm256_srli_epi64(den, 32), pv);
    const __m256i fail_even = _mm256_cmpgt_epi64(rhs_even, lhs_even);
    const __m256i fail_odd = _mm256_cmpgt_epi64(rhs_odd, lhs_odd);
    const __m256i fail = _mm256_blend_epi32(fail_even, fail_odd, 0b10101010);

    const __m256i empty = _mm256_cmpeq_epi32(s, zero);
    const __m256i reject = _mm256_or_si256(fail, empty);
    const int bits = ~_mm256_movemask_ps(_mm256_castsi256_ps(reject)) & 0xFF;
    for (int k = 0; k < 8; ++k) pass[i + static_cast<std::size_t>(k)] = (bits >> k) & 1;
  }
  if (i < n) scalar::threshold_pass(shared + i, other_mass + i, n - i, self_mass, p, q, pass + i);
}

ANALOG_AVX2
std::uint32_t slot_min(const std::uint32_t* const* columns, const std::uint32_t* const* ranks,
                       std::size_t slots, std::size_t rows, std::uint32_t* out_min) {
  __m256i best = _mm256_setzero_si256();
  const __m256i ones = _mm256_set1_epi32(-1);
  std::size_t j = 0;
  for (; j + 8 <= rows; j += 8) {
    __m256i m = ones;
    for (std::size_t s = 0; s < slots; ++s) {
      const __m256i idx = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(columns[s] + j));
      const __m256i r =
          _mm256_i32gather_epi32(reinterpret_cast<const int*>(ranks[s]), idx, 4);
      m = _mm256_min_epu32(m, r);
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out_min + j), m);
    best = _mm256_max_epu32(best, m);
  }
  alignas(32) std::uint32_t lanes[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), best);
  std::uint32_t result = *std::max_element(lanes, lanes + 8);
  for (; j < rows; ++j) {
    std::uint32_t m = std::numeric_limits<std::uint32_t>::max();
    for (std::size_t s = 0; s < slots; ++s) m = std::min(m, ranks[s][columns[s][j]]);
    out_min[j] = m;
    result = std::max(result, m);
  }
  return result;
}

}  // namespace analog::kernels::avx2

#endif
