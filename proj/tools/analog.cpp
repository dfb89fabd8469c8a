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

// analog: build index artifacts from a corpus and query them.
//
// Exit status: 0 success (empty results included), 1 usage or
// configuration error, 2 data error. Errors are also written as an
// "error" record on stdout in the selected format.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "analog/ablation.hpp"
#include "analog/error.hpp"
#include "analog/persistence.hpp"
#include "analog/records.hpp"

namespace {

using nlohmann::json;
using namespace analog;

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

struct Options {
  std::string format = "tsv";
  std::size_t window = 2;
  std::size_t n_min = 2;
  std::size_t n_max = 5;
  std::string schedule = "identity,3/4,1/2,1/4,0";
  std::string tau = "all";
  bool lowercase = true;
  std::uint64_t seed = 0;

  std::string corpus;
  std::string artifact;
  std::string output;
  std::vector<std::string> candidates;
  std::string candidates_file;
  bool explain = false;
  std::size_t top_k = 10;
  std::string token;
  std::string theta;
  int level = -1;
  std::string deletions;
  std::string mode;
  std::string fraction;
  std::size_t steps = 0;
};

RunConfig run_config(const Options& o) {
  RunConfig c;
  c.window = o.window;
  c.ingest.lowercase = o.lowercase;
  c.ingest.ngram_min = o.n_min;
  c.ingest.ngram_max = o.n_max;
  c.schedule = Schedule::parse(o.schedule);
  c.tau = parse_tau(o.tau);
  c.format = parse_output_format(o.format);
  c.seed = o.seed;
  c.validate();
  return c;
}

// The artifact fixes window, schedule and ingest settings; echo those.
RunConfig with_artifact(RunConfig c, const Engine& engine) {
  c.window = engine.config().window;
  c.schedule = engine.config().schedule;
  c.ingest = engine.knowledge_store().config();
  return c;
}

std::vector<std::string> gather_candidates(const Options& o) {
  std::vector<std::string> out = o.candidates;
  if (!o.candidates_file.empty()) {
    std::ifstream in(o.candidates_file);
    if (!in) throw DataError("io", "cannot read " + o.candidates_file);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.push_back(line);
    }
  }
  if (out.empty()) throw ConfigError("no candidates given");
  return out;
}

std::vector<PatternId> parse_ids(std::string_view text) {
  std::vector<PatternId> ids;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      ids.push_back(static_cast<PatternId>(v));
    } catch (const std::exception&) {
      throw ConfigError("bad pattern id '" + item + "'");
    }
  }
  return ids;
}

std::vector<std::vector<PatternId>> parse_steps(std::string_view text) {
  std::vector<std::vector<PatternId>> steps;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ';')) steps.push_back(parse_ids(item));
  return steps;
}

int cmd_build(const Options& o, const RunConfig& cfg, RecordWriter& out) {
  std::ifstream in(o.corpus, std::ios::binary);
  if (!in) throw DataError("io", "cannot read corpus " + o.corpus);
  Engine engine = Engine::build(PopulationStore::ingest(in, cfg.ingest), cfg.engine());
  save_artifact(engine, o.output);
  out.write("header", header_fields("build", cfg, artifact_fingerprint(engine)));
  json levels = json::array();
  for (const auto& lvl : engine.hierarchy().levels()) levels.push_back(lvl.families.size());
  out.write("built", json{{"artifact", o.output},
                          {"corpus_fingerprint", hex64(engine.store().corpus_fingerprint())},
                          {"tokens", engine.store().vocabulary_size()},
                          {"patterns", engine.store().patterns().size()},
                          {"total_tokens", engine.store().total_tokens()},
                          {"families_per_level", levels}});
  return 0;
}

int cmd_score(const Options& o, const RunConfig& base, RecordWriter& out) {
  const Engine engine = load_artifact(o.artifact);
  const RunConfig cfg = with_artifact(base, engine);
  const auto candidates = gather_candidates(o);
  out.write("header", header_fields("score", cfg, artifact_fingerprint(engine)));
  for (const auto& text : candidates) {
    const Judgment j = engine.judge(engine.encode(text), cfg.tau);
    out.write("judgment", judgment_fields(j, engine, o.explain, o.top_k));
  }
  return 0;
}

int cmd_neighbors(const Options& o, const RunConfig& base, RecordWriter& out) {
  const Engine engine = load_artifact(o.artifact);
  const RunConfig cfg = with_artifact(base, engine);
  const Rational theta = o.theta.empty() ? Rational(1, 2) : Rational::parse(o.theta);
  const auto words = engine.knowledge_store().normalize(o.token);
  if (words.size() != 1) throw ConfigError("neighbors takes exactly one token");
  const auto id = engine.knowledge_store().lookup(words.front());
  if (!id) throw DataError("unknown_token", "unknown token: '" + words.front() + "'");
  const auto found = engine.model().neighbors(*id, theta);
  out.write("header", header_fields("neighbors", cfg, artifact_fingerprint(engine)));
  for (const auto& n : found) {
    out.write("neighbor", json{{"token", words.front()},
                               {"neighbor", engine.knowledge_store().surface(n.token)},
                               {"neighbor_id", n.token},
                               {"similarity", n.similarity.str()},
                               {"similarity_decimal", n.similarity.decimal()},
                               {"theta", theta.str()}});
  }
  return 0;
}

int cmd_families(const Options& o, const RunConfig& base, RecordWriter& out) {
  const Engine engine = load_artifact(o.artifact);
  const RunConfig cfg = with_artifact(base, engine);
  const auto& store = engine.knowledge_store();

  std::vector<std::pair<json, FamilyLevel>> selected;
  if (!o.theta.empty()) {
    const Rational theta = Rational::parse(o.theta);
    selected.emplace_back(json(nullptr), engine.model().partition(theta));
  } else if (o.level >= 0) {
    if (static_cast<std::size_t>(o.level) >= engine.hierarchy().level_count()) {
      throw ConfigError("no hierarchy level " + std::to_string(o.level));
    }
    selected.emplace_back(json(o.level), engine.hierarchy().level(static_cast<std::size_t>(o.level)));
  } else {
    for (std::size_t l = 0; l < engine.hierarchy().level_count(); ++l) {
      selected.emplace_back(json(l), engine.hierarchy().level(l));
    }
  }
  out.write("header", header_fields("families", cfg, artifact_fingerprint(engine)));
  for (const auto& [level, part] : selected) {
    for (const auto& fam : part.families) {
      json members = json::array();
      for (TokenId t : fam) members.push_back(store.surface(t));
      out.write("family", json{{"level", level},
                               {"threshold", part.threshold ? part.threshold->str() : "identity"},
                               {"size", fam.size()},
                               {"members", members}});
    }
  }
  return 0;
}

std::vector<AblationMode> modes_of(const std::string& text, bool allow_both) {
  if (text.empty() || text == "both") {
    if (!allow_both && text == "both") throw ConfigError("degrade runs one mode at a time");
    if (allow_both) return {AblationMode::frozen, AblationMode::recompute};
    return {AblationMode::frozen};
  }
  return {parse_ablation_mode(text)};
}

int cmd_ablate(const Options& o, const RunConfig& base, RecordWriter& out) {
  if (o.deletions.empty()) throw ConfigError("ablate needs --delete");
  const Engine engine = load_artifact(o.artifact);
  const RunConfig cfg = with_artifact(base, engine);
  const auto candidates = gather_candidates(o);
  AblationConfig ab;
  ab.explicit_steps = {parse_ids(o.deletions)};
  ab.tau = cfg.tau;
  std::vector<AblationReport> reports;
  for (AblationMode mode : modes_of(o.mode, true)) {
    ab.mode = mode;
    reports.push_back(degradation_curve(engine, candidates, ab));
  }
  out.write("header", header_fields("ablate", cfg, artifact_fingerprint(engine)));
  for (const auto& r : reports) write_ablation_report(out, r, engine, o.explain, o.top_k);
  return 0;
}

int cmd_degrade(const Options& o, const RunConfig& base, RecordWriter& out) {
  const Engine engine = load_artifact(o.artifact);
  const RunConfig cfg = with_artifact(base, engine);
  const auto candidates = gather_candidates(o);
  AblationConfig ab;
  ab.mode = modes_of(o.mode, false).front();
  ab.tau = cfg.tau;
  if (!o.fraction.empty()) {
    if (!o.deletions.empty()) throw ConfigError("use either --delete-steps or --fraction, not both");
    ab.random = RandomDeletion{Rational::parse(o.fraction), o.steps, cfg.seed};
  } else {
    ab.explicit_steps = parse_steps(o.deletions);
  }
  const AblationReport report = degradation_curve(engine, candidates, ab);
  out.write("header", header_fields("degrade", cfg, artifact_fingerprint(engine)));
  write_ablation_report(out, report, engine, o.explain, o.top_k);
  return 0;
}

void add_candidate_options(CLI::App* cmd, Options& o) {
  cmd->add_option("candidates", o.candidates, "Candidate sequences (one quoted argument each)");
  cmd->add_option("--candidates-file", o.candidates_file, "File with one candidate per line");
  cmd->add_flag("--explain", o.explain, "Include supporting patterns");
  cmd->add_option("--top-k", o.top_k, "Supports listed per judgment with --explain");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Analogical acceptability engine over a corpus of attested patterns"};
  app.set_config("--config", "", "Flat key=value configuration file");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--format", o.format, "Output format: tsv or json-lines")->capture_default_str();
  app.add_option("--window", o.window, "Context window W")->capture_default_str();
  app.add_option("--n-min", o.n_min, "Shortest stored n-gram")->capture_default_str();
  app.add_option("--n-max", o.n_max, "Longest stored n-gram")->capture_default_str();
  app.add_option("--schedule", o.schedule, "Threshold schedule, e.g. identity,3/4,1/2,1/4,0")
      ->capture_default_str();
  app.add_option("--tau", o.tau, "Coverage requirement: all, most or a fraction")->capture_default_str();
  app.add_option("--lowercase", o.lowercase, "Fold ASCII case when tokenizing")->capture_default_str();
  app.add_option("--seed", o.seed, "Seed for random deletion schedules")->capture_default_str();

  auto* build = app.add_subcommand("build", "Build an index artifact from a corpus");
  build->add_option("corpus", o.corpus, "Corpus file, one pattern per line")->required();
  build->add_option("-o,--output", o.output, "Artifact path")->required();

  auto* score = app.add_subcommand("score", "Judge candidate sequences");
  score->add_option("artifact", o.artifact)->required();
  add_candidate_options(score, o);

  auto* neighbors = app.add_subcommand("neighbors", "Tokens similar to a token");
  neighbors->add_option("artifact", o.artifact)->required();
  neighbors->add_option("token", o.token)->required();
  neighbors->add_option("--theta", o.theta, "Similarity threshold (default 1/2)");

  auto* families = app.add_subcommand("families", "Family partitions");
  families->add_option("artifact", o.artifact)->required();
  families->add_option("--theta", o.theta, "Partition at an arbitrary threshold");
  families->add_option("--level", o.level, "Only this hierarchy level");

  auto* ablate = app.add_subcommand("ablate", "Delete patterns and re-judge candidates");
  ablate->add_option("artifact", o.artifact)->required();
  ablate->add_option("--delete", o.deletions, "Comma-separated pattern ids (0-based)");
  ablate->add_option("--mode", o.mode, "frozen, recompute or both (default both)");
  add_candidate_options(ablate, o);

  auto* degrade = app.add_subcommand("degrade", "Stepwise deletion curve");
  degrade->add_option("artifact", o.artifact)->required();
  degrade->add_option("--delete-steps", o.deletions, "Explicit steps, e.g. '2;0' or '2,5;0'");
  degrade->add_option("--fraction", o.fraction, "Fraction of patterns deleted per step");
  degrade->add_option("--steps", o.steps, "Number of random deletion steps");
  degrade->add_option("--mode", o.mode, "frozen (default) or recompute");
  add_candidate_options(degrade, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e) == 0) return 0;
    RecordWriter(std::cout, o.format == "json-lines" ? OutputFormat::json_lines : OutputFormat::tsv)
        .write("error", json{{"code", "usage"}, {"message", e.what()}, {"exit", kExitConfig}});
    return kExitConfig;
  }

  const OutputFormat fallback = o.format == "json-lines" ? OutputFormat::json_lines : OutputFormat::tsv;
  RecordWriter out(std::cout, fallback);
  auto report = [&](const Error& e, int status) {
    std::cerr << "analog: " << e.what() << "\n";
    out.write("error", json{{"code", e.code()}, {"message", e.what()}, {"exit", status}});
    return status;
  };

  try {
    const RunConfig cfg = run_config(o);
    if (build->parsed()) return cmd_build(o, cfg, out);
    if (score->parsed()) return cmd_score(o, cfg, out);
    if (neighbors->parsed()) return cmd_neighbors(o, cfg, out);
    if (families->parsed()) return cmd_families(o, cfg, out);
    if (ablate->parsed()) return cmd_ablate(o, cfg, out);
    if (degrade->parsed()) return cmd_degrade(o, cfg, out);
  } catch (const ConfigError& e) {
    return report(e, kExitConfig);
  } catch (const Error& e) {
    return report(e, kExitData);
  } catch (const std::exception& e) {
    return report(DataError("internal", e.what()), kExitData);
  }
  return kExitConfig;
}
