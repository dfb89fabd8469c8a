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

#include "analog/records.hpp"

#include <ostream>

namespace analog {

using nlohmann::json;

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\\':
        out += "\\\\";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string sequence_text(const Engine& engine, const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += engine.store().surface(tokens[i]);
  }
  return out;
}

json deletion_json(const AblationConfig& config) {
  json j{{"mode", std::string(to_string(config.mode))}, {"tau", config.tau.str()}};
  if (config.random) {
    j["fraction"] = config.random->fraction.str();
    j["steps"] = config.random->steps;
    j["seed"] = config.random->seed;
  } else {
    j["explicit_steps"] = config.explicit_steps;
  }
  return j;
}

}  // namespace

std::string render_tsv(std::string_view kind, const json& fields) {
  std::string line(kind);
  for (auto it = fields.begin(); it != fields.end(); ++it) {
    if (it.key() == "record") continue;
    line += '\t';
    line += it.key();
    line += '=';
    line += it.value().is_string() ? escape(it.value().get<std::string>()) : it.value().dump();
  }
  return line;
}

void RecordWriter::write(std::string_view kind, json fields) {
  fields["record"] = std::string(kind);
  if (format_ == OutputFormat::json_lines) {
    out_ << fields.dump() << '\n';
  } else {
    out_ << render_tsv(kind, fields) << '\n';
  }
}

json header_fields(std::string_view command, const RunConfig& config,
                   std::string_view artifact_fingerprint) {
  return json{{"tool", "analog"},
              {"command", std::string(command)},
              {"config", config.to_json()},
              {"artifact", std::string(artifact_fingerprint)},
              {"artifact_version", kArtifactVersion}};
}

json judgment_fields(const Judgment& judgment, const Engine& engine, bool explain, std::size_t top_k) {
  const auto& c = judgment.candidate;
  json oov_tokens = json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c.ids[i]) oov_tokens.push_back(c.surfaces[i]);
  }
  json j{{"candidate", c.text()},
         {"oov", c.has_oov()},
         {"oov_tokens", oov_tokens},
         {"nn_score", judgment.nn_score.str()},
         {"nn_score_decimal", judgment.nn_score.decimal()},
         {"coverage", judgment.coverage.str()},
         {"coverage_decimal", judgment.coverage.decimal()},
         {"tie", judgment.tie},
         {"support_count", judgment.supports.size()},
         {"population_empty", judgment.population_empty}};
  if (judgment.level) {
    j["level"] = *judgment.level;
  } else {
    j["level"] = "unsupported";
  }
  if (explain) {
    json supports = json::array();
    for (std::size_t k = 0; k < judgment.supports.size() && k < top_k; ++k) {
      const auto& s = judgment.supports[k];
      json slots = json::array();
      for (const auto& v : s.slot_similarity) slots.push_back(v.str());
      supports.push_back(json{{"pattern", s.pattern},
                              {"sequence", sequence_text(engine, s.tokens)},
                              {"slots", slots},
                              {"min", s.min_slot.str()}});
    }
    j["supports"] = supports;
  }
  return j;
}

void write_ablation_report(RecordWriter& writer, const AblationReport& report, const Engine& engine,
                           bool explain, std::size_t top_k) {
  json cfg = deletion_json(report.config);
  cfg["candidates"] = report.candidates;
  writer.write("ablation", cfg);

  for (const auto& step : report.steps) {
    const Engine* judge_engine = &engine;
    // Support token ids belong to the engine that judged them; recompute
    // mode renumbers the vocabulary, so rebuild that engine for rendering.
    Engine derived = engine;
    if (explain && step.step > 0 && report.config.mode == AblationMode::recompute) {
      std::vector<PatternId> cumulative;
      for (const auto& s : report.steps) {
        if (s.step > step.step) break;
        cumulative.insert(cumulative.end(), s.deleted.begin(), s.deleted.end());
      }
      derived = delete_patterns(engine, cumulative, report.config.mode);
      judge_engine = &derived;
    }
    writer.write("step", json{{"step", step.step},
                              {"deleted", step.deleted},
                              {"remaining_patterns", step.remaining_patterns},
                              {"mean_nn_score", step.mean_nn_score.str()},
                              {"mean_nn_score_decimal", step.mean_nn_score.decimal()},
                              {"tie_count", step.ties.size()}});
    for (std::size_t i = 0; i < step.judgments.size(); ++i) {
      json j = judgment_fields(step.judgments[i], *judge_engine, explain, top_k);
      j["step"] = step.step;
      j["index"] = i;
      writer.write("judgment", j);
    }
    for (const auto& [a, b] : step.ties) {
      writer.write("tie", json{{"step", step.step},
                               {"a", a},
                               {"b", b},
                               {"candidate_a", report.candidates[a]},
                               {"candidate_b", report.candidates[b]},
                               {"nn_score", step.judgments[a].nn_score.str()}});
    }
  }

  for (const auto& step : report.steps) {
    json scores = json::array();
    for (const auto& j : step.judgments) scores.push_back(j.nn_score.str());
    writer.write("summary", json{{"step", step.step},
                                 {"remaining_patterns", step.remaining_patterns},
                                 {"mean_nn_score", step.mean_nn_score.decimal()},
                                 {"tie_count", step.ties.size()},
                                 {"nn_scores", scores}});
  }
}

}  // namespace analog
