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

// Output record streams shared by every CLI command.
//
// json-lines: one JSON object per line, keys sorted, "record" names the kind.
// tsv:        kind<TAB>key=value<TAB>key=value..., keys sorted; strings are
//             written raw with \t, \n and \\ escaped, everything else as
//             compact JSON.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "analog/ablation.hpp"
#include "analog/persistence.hpp"

namespace analog {

class RecordWriter {
 public:
  RecordWriter(std::ostream& out, OutputFormat format) : out_(out), format_(format) {}

  /// `fields` must be an object; a "record": kind entry is added.
  void write(std::string_view kind, nlohmann::json fields);

 private:
  std::ostream& out_;
  OutputFormat format_;
};

std::string render_tsv(std::string_view kind, const nlohmann::json& fields);

/// Header fields: command, tool version, run config and artifact fingerprint.
nlohmann::json header_fields(std::string_view command, const RunConfig& config,
                             std::string_view artifact_fingerprint);

/// Score, level, coverage, tie and oov flags; with `explain`, the first
/// `top_k` supports with their per-slot similarities.
nlohmann::json judgment_fields(const Judgment& judgment, const Engine& engine, bool explain,
                               std::size_t top_k);

/// Config echo, per-step records, per-candidate judgments, tie records and
/// a closing summary table (one "summary" row per step).
void write_ablation_report(RecordWriter& writer, const AblationReport& report, const Engine& engine,
                           bool explain, std::size_t top_k);

}  // namespace analog
