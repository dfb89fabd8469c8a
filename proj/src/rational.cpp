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

#include "analog/rational.hpp"

#include <charconv>
#include <numeric>

#include "analog/error.hpp"

namespace analog {

namespace {

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("not a number: '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw ConfigError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::ratio_or_zero(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return Rational();
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

Rational Rational::parse(std::string_view text) {
  const std::string_view whole = text;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rational(parse_int(text.substr(0, slash), whole),
                    parse_int(text.substr(slash + 1), whole));
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 17) throw ConfigError("too many decimals: '" + std::string(whole) + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::string_view head = text.substr(0, dot);
    const std::int64_t ip = head.empty() ? 0 : parse_int(head, whole);
    const std::int64_t fp = frac.empty() ? 0 : parse_int(frac, whole);
    if (fp < 0) throw ConfigError("not a number: '" + std::string(whole) + "'");
    return Rational(ip * scale + (ip < 0 ? -fp : fp), scale);
  }
  return Rational(parse_int(text, whole));
}

std::string Rational::str() const {
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string Rational::decimal(int places) const {
  __int128 scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  const bool negative = num_ < 0;
  const __int128 n = negative ? -static_cast<__int128>(num_) : num_;
  const __int128 scaled = (n * scale * 2 + den_) / (2 * static_cast<__int128>(den_));
  const auto int_part = static_cast<std::int64_t>(scaled / scale);
  auto frac_part = static_cast<std::int64_t>(scaled % scale);
  std::string out = negative ? "-" : "";
  out += std::to_string(int_part);
  if (places > 0) {
    std::string digits = std::to_string(frac_part);
    out += '.';
    out.append(static_cast<std::size_t>(places) - digits.size(), '0');
    out += digits;
  }
  return out;
}

Rational operator+(const Rational& a, const Rational& b) {
  const std::int64_t g = std::gcd(a.den_, b.den_);
  const std::int64_t lcm_factor = b.den_ / g;
  return Rational(a.num_ * lcm_factor + b.num_ * (a.den_ / g), a.den_ * lcm_factor);
}

Rational operator/(const Rational& a, std::int64_t divisor) {
  if (divisor == 0) throw ConfigError("division of rational by zero");
  return Rational(a.num_, a.den_ * divisor);
}

}  // namespace analog
