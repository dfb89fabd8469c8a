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

// Index artifact: one JSON object per line, keys sorted, every rational
// written as an integer pair [num, den]. Line order:
//
//   header   {"record":"header","format":"analog-index","version":1,...}
//   token    {"record":"token","id":..,"surface":..}                 (id order)
//   pattern  {"record":"pattern","id":..,"tokens":[..],"count":..,"lines":[..]}
//   profile  {"record":"profile","token":..,"mass":..,"features":[[offset,neighbor,count],..]}
//   level    {"record":"level","level":l,"threshold":[p,q],"families":[[..],..]}  (l >= 1)
//
// Profiles with no features are omitted; level 0 (identity) is implicit.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "analog/acceptability.hpp"

namespace analog {

inline constexpr int kArtifactVersion = 1;
inline constexpr std::string_view kArtifactFormat = "analog-index";

enum class OutputFormat { tsv, json_lines };
OutputFormat parse_output_format(std::string_view text);
std::string_view to_string(OutputFormat format) noexcept;

struct RunConfig {
  std::size_t window = 2;
  IngestConfig ingest;
  Schedule schedule = Schedule::defaults();
  Rational tau{1};
  OutputFormat format = OutputFormat::tsv;
  std::uint64_t seed = 0;

  /// Throws ConfigError on any invalid field.
  void validate() const;
  EngineConfig engine() const { return EngineConfig{window, schedule}; }
  nlohmann::json to_json() const;
};

nlohmann::json rational_json(const Rational& r);
Rational rational_from_json(const nlohmann::json& j);

/// Canonical artifact bytes; equal engines serialize identically.
std::string serialize_artifact(const Engine& engine);

/// Parses and fully validates an artifact: header version, contiguous ids,
/// profiles against a rescan of the patterns, hierarchy nestedness and both
/// fingerprints. Throws DataError("version") on a version mismatch and
/// DataError("format") / DataError("corrupt") otherwise.
Engine parse_artifact(std::string_view bytes);

/// Writes to a sibling temporary file, then renames over `path`.
void save_artifact(const Engine& engine, const std::filesystem::path& path);
Engine load_artifact(const std::filesystem::path& path);

std::uint64_t engine_config_fingerprint(const Engine& engine);
/// Hash of the serialized artifact.
std::string artifact_fingerprint(const Engine& engine);

}  // namespace analog
