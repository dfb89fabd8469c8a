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

// Data-parallel inner loops of the engine. Each kernel has a scalar
// reference and, where the CPU allows, an AVX2 variant; the variant is
// picked once at startup and both are required to agree bit for bit.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace analog::kernels {

enum class Isa { scalar, avx2 };

/// Largest mass / threshold term the 32-bit kernels accept. Keeps every
/// cross product below 2^62 so signed 64-bit compares are exact.
inline constexpr std::uint32_t kMaxOperand = (1u << 31) - 1;

/// pass[i] = 1 iff  shared[i] / (self_mass + other_mass[i] - shared[i]) >= p / q,
/// where 0/0 reads as 0 (two empty profiles). With p == 0 every lane passes.
/// Requires shared[i] <= min(self_mass, other_mass[i]) and all inputs
/// <= kMaxOperand, q > 0.
using ThresholdPassFn = void (*)(const std::uint32_t* shared, const std::uint32_t* other_mass,
                                 std::size_t n, std::uint32_t self_mass, std::uint32_t p,
                                 std::uint32_t q, std::uint8_t* pass);

/// For every row j: out_min[j] = min over slots s of ranks[s][columns[s][j]].
/// Returns the maximum of out_min (0 when rows == 0). Column values must be
/// valid indices into the matching rank table and below 2^31.
using SlotMinFn = std::uint32_t (*)(const std::uint32_t* const* columns,
                                    const std::uint32_t* const* ranks, std::size_t slots,
                                    std::size_t rows, std::uint32_t* out_min);

struct Dispatch {
  Isa isa;
  ThresholdPassFn threshold_pass;
  SlotMinFn slot_min;
};

bool supported(Isa isa) noexcept;

/// Table for a specific ISA; throws ConfigError when the CPU or build lacks it.
const Dispatch& for_isa(Isa isa);

/// Best supported ISA, unless the environment variable ANALOG_SIMD=scalar
/// pins the reference path. Resolved once.
const Dispatch& active();

std::string_view name(Isa isa) noexcept;

namespace scalar {
void threshold_pass(const std::uint32_t* shared, const std::uint32_t* other_mass, std::size_t n,
                    std::uint32_t self_mass, std::uint32_t p, std::uint32_t q, std::uint8_t* pass);
std::uint32_t slot_min(const std::uint32_t* const* columns, const std::uint32_t* const* ranks,
                       std::size_t slots, std::size_t rows, std::uint32_t* out_min);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define ANALOG_HAVE_AVX2_KERNELS 1
namespace avx2 {
void threshold_pass(const std::uint32_t* shared, const std::uint32_t* other_mass, std::size_t n,
                    std::uint32_t self_mass, std::uint32_t p, std::uint32_t q, std::uint8_t* pass);
std::uint32_t slot_min(const std::uint32_t* const* columns, const std::uint32_t* const* ranks,
                       std::size_t slots, std::size_t rows, std::uint32_t* out_min);
}  // namespace avx2
#endif

}  // namespace analog::kernels
