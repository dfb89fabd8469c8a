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

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace analog {

/// Exact non-negative-denominator fraction, always kept in lowest terms.
/// Every score and threshold in the engine is one of these; comparisons
/// cross-multiply in 128-bit so ties are exact.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den);
  explicit Rational(std::int64_t value) : num_(value), den_(1) {}

  /// num/den, or 0 when den is 0 (the empty-profile convention).
  static Rational ratio_or_zero(std::uint64_t num, std::uint64_t den);

  /// Accepts "p/q", an integer, or a plain decimal such as "0.75".
  static Rational parse(std::string_view text);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  /// "3/5"; integers keep the denominator ("1/1").
  std::string str() const;
  /// Fixed-point rendering rounded half-up, e.g. "0.600000".
  std::string decimal(int places = 6) const;
  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    return lhs <=> rhs;
  }

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, std::int64_t divisor);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational zero_rational() { return Rational(); }
inline Rational one_rational() { return Rational(1); }

}  // namespace analog
