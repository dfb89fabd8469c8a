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

#include <algorithm>
#include <limits>

#include "analog/kernels.hpp"

namespace analog::kernels::scalar {

void threshold_pass(const std::uint32_t* shared, const std::uint32_t* other_mass, std::size_t n,
                    std::uint32_t self_mass, std::uint32_t p, std::uint32_t q, std::uint8_t* pass) {
  if (p == 0) {
    std::fill(pass, pass + n, std::uint8_t{1});
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = shared[i];
    const std::uint64_t den = std::uint64_t{self_mass} + other_mass[i] - s;
    pass[i] = (s != 0 && s * q >= std::uint64_t{p} * den) ? 1 : 0;
  }
}

std::uint32_t slot_min(const std::uint32_t* const* columns, const std::uint32_t* const* ranks,
                       std::size_t slots, std::size_t rows, std::uint32_t* out_min) {
  std::uint32_t best = 0;
  for (std::size_t j = 0; j < rows; ++j) {
    std::uint32_t m = std::numeric_limits<std::uint32_t>::max();
    for (std::size_t s = 0; s < slots; ++s) m = std::min(m, ranks[s][columns[s][j]]);
    out_min[j] = m;
    best = std::max(best, m);
  }
  return best;
}

}  // namespace analog::kernels::scalar
