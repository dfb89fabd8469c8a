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

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#ifndef ANALOG_FIXTURE_DIR
#error "ANALOG_FIXTURE_DIR must point at the fixtures directory"
#endif

namespace testfx {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(ANALOG_FIXTURE_DIR) / (name + ".txt");
}

inline std::vector<std::string> fixture_lines(const std::string& name) {
  std::ifstream in(fixture_path(name));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

inline const std::string kMade = "concerning proposals made by historians";
inline const std::string kDone = "concerning proposals done by historians";

}  // namespace testfx
