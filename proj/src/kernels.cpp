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

#include <cstdlib>
#include <string>

#include "analog/error.hpp"

namespace analog::kernels {

namespace {

const Dispatch kScalar{Isa::scalar, &scalar::threshold_pass, &scalar::slot_min};
#if defined(ANALOG_HAVE_AVX2_KERNELS)
const Dispatch kAvx2{Isa::avx2, &avx2::threshold_pass, &avx2::slot_min};
#endif

const Dispatch& resolve() {
  const char* env = std::getenv("ANALOG_SIMD");
  if (env && std::string(env) == "scalar") return kScalar;
  if (supported(Isa::avx2)) return for_isa(Isa::avx2);
  return kScalar;
}

}  // namespace

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(ANALOG_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const Dispatch& for_isa(Isa isa) {
  if (!supported(isa)) {
    throw ConfigError("instruction set not available: " + std::string(name(isa)));
  }
#if defined(ANALOG_HAVE_AVX2_KERNELS)
  if (isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

const Dispatch& active() {
  static const Dispatch& chosen = resolve();
  return chosen;
}

std::string_view name(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

}  // namespace analog::kernels
