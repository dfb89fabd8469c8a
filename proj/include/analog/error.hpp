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

#include <stdexcept>
#include <string>
#include <utility>

namespace analog {

/// Base of every error the library raises. `code()` is a stable,
/// machine-readable tag ("empty_corpus", "unknown_token", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Invalid configuration or usage: bad schedule, tau, window, flags.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
  ConfigError(std::string code, const std::string& message)
      : Error(std::move(code), message) {}
};

/// Problems with the data itself: corpus, artifact, candidates, ids.
class DataError : public Error {
 public:
  DataError(std::string code, const std::string& message)
      : Error(std::move(code), message) {}
};

}  // namespace analog
