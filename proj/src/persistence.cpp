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

#include "analog/persistence.hpp"

#include <fstream>
#include <sstream>

#include "analog/error.hpp"

namespace analog {

using nlohmann::json;

namespace {

json ingest_json(const IngestConfig& c) {
  return json{{"lowercase", c.lowercase}, {"ngram_min", c.ngram_min}, {"ngram_max", c.ngram_max}};
}

json schedule_json(const Schedule& s) {
  json out = json::array();
  for (const auto& t : s.thresholds()) out.push_back(rational_json(t));
  return out;
}

[[noreturn]] void corrupt(const std::string& what) { throw DataError("corrupt", "corrupt artifact: " + what); }

// Cursor over the artifact's lines; each must be a JSON object of the
// expected record kind.
class LineReader {
 public:
  explicit LineReader(std::string_view bytes) : bytes_(bytes) {}

  bool next(json& out) {
    if (pos_ >= bytes_.size()) return false;
    std::size_t end = bytes_.find('\n', pos_);
    if (end == std::string_view::npos) {
      throw DataError("format", "artifact does not end with a newline");
    }
    std::string_view line = bytes_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_;
    try {
      out = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("format", "artifact line " + std::to_string(line_) + ": " + e.what());
    }
    if (!out.is_object() || !out.contains("record") || !out["record"].is_string()) {
      throw DataError("format", "artifact line " + std::to_string(line_) + " is not a record");
    }
    return true;
  }

  std::size_t line() const { return line_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

template <typename T>
T field(const json& rec, const char* key, std::size_t line) {
  try {
    return rec.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError("format", "artifact line " + std::to_string(line) + ", field '" + key + "': " + e.what());
  }
}

}  // namespace

OutputFormat parse_output_format(std::string_view text) {
  if (text == "tsv") return OutputFormat::tsv;
  if (text == "json-lines") return OutputFormat::json_lines;
  throw ConfigError("output format must be 'tsv' or 'json-lines', got '" + std::string(text) + "'");
}

std::string_view to_string(OutputFormat format) noexcept {
  return format == OutputFormat::tsv ? "tsv" : "json-lines";
}

void RunConfig::validate() const {
  if (window == 0) throw ConfigError("context window must be >= 1");
  ingest.validate();
  validate_tau(tau);
}

json RunConfig::to_json() const {
  return json{{"window", window},
              {"lowercase", ingest.lowercase},
              {"ngram_min", ingest.ngram_min},
              {"ngram_max", ingest.ngram_max},
              {"schedule", schedule.str()},
              {"tau", tau.str()},
              {"format", std::string(to_string(format))},
              {"seed", seed}};
}

json rational_json(const Rational& r) { return json::array({r.num(), r.den()}); }

Rational rational_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw DataError("format", "expected a rational [num, den], got " + j.dump());
  }
  const auto den = j[1].get<std::int64_t>();
  if (den <= 0) throw DataError("format", "rational with non-positive denominator: " + j.dump());
  Rational r(j[0].get<std::int64_t>(), den);
  if (r.num() != j[0].get<std::int64_t>() || r.den() != den) {
    throw DataError("format", "rational not in lowest terms: " + j.dump());
  }
  return r;
}

std::uint64_t engine_config_fingerprint(const Engine& engine) {
  const auto cfg = engine.config();
  const auto& ingest = engine.knowledge_store().config();
  std::ostringstream s;
  s << "lowercase=" << ingest.lowercase << ";ngram_min=" << ingest.ngram_min
    << ";ngram_max=" << ingest.ngram_max << ";window=" << cfg.window
    << ";schedule=" << cfg.schedule.str();
  return fnv1a64(s.str());
}

std::string serialize_artifact(const Engine& engine) {
  const auto& store = engine.knowledge_store();
  const auto& index = engine.model().index();
  const auto& hierarchy = engine.hierarchy();
  std::string out;
  auto emit = [&out](const json& rec) {
    out += rec.dump();
    out += '\n';
  };

  emit(json{{"record", "header"},
            {"format", kArtifactFormat},
            {"version", kArtifactVersion},
            {"ingest", ingest_json(store.config())},
            {"window", index.window()},
            {"schedule", schedule_json(hierarchy.schedule())},
            {"corpus_fingerprint", hex64(store.corpus_fingerprint())},
            {"config_fingerprint", hex64(engine_config_fingerprint(engine))},
            {"counts",
             {{"tokens", store.vocabulary_size()},
              {"patterns", store.patterns().size()},
              {"levels", hierarchy.level_count()}}}});
  for (const auto& t : store.vocabulary()) {
    emit(json{{"record", "token"}, {"id", t.id}, {"surface", t.surface}});
  }
  for (const auto& p : store.patterns()) {
    emit(json{{"record", "pattern"},
              {"id", p.id},
              {"tokens", p.tokens},
              {"count", p.count},
              {"lines", p.source_lines}});
  }
  for (const auto& prof : index.profiles()) {
    if (prof.features.empty()) continue;
    json feats = json::array();
    for (const auto& fc : prof.features) {
      feats.push_back(json::array({fc.feature.offset, fc.feature.neighbor, fc.count}));
    }
    emit(json{{"record", "profile"}, {"token", prof.token}, {"mass", prof.mass}, {"features", feats}});
  }
  for (std::size_t l = 1; l < hierarchy.level_count(); ++l) {
    const auto& lvl = hierarchy.level(l);
    emit(json{{"record", "level"},
              {"level", l},
              {"threshold", rational_json(*lvl.threshold)},
              {"families", lvl.families}});
  }
  return out;
}

namespace {

Engine parse_artifact_records(std::string_view bytes) {
  LineReader reader(bytes);
  json rec;
  if (!reader.next(rec) || rec["record"] != "header") {
    throw DataError("format", "artifact must start with a header record");
  }
  if (!rec.contains("format") || rec["format"] != kArtifactFormat) {
    throw DataError("format", "not an analog index artifact");
  }
  const int version = field<int>(rec, "version", 1);
  if (version != kArtifactVersion) {
    throw DataError("version", "artifact version " + std::to_string(version) +
                                   " does not match supported version " + std::to_string(kArtifactVersion));
  }
  IngestConfig ingest;
  try {
    const auto& ij = rec.at("ingest");
    ingest.lowercase = ij.at("lowercase").get<bool>();
    ingest.ngram_min = ij.at("ngram_min").get<std::size_t>();
    ingest.ngram_max = ij.at("ngram_max").get<std::size_t>();
  } catch (const json::exception& e) {
    throw DataError("format", std::string("artifact header ingest config: ") + e.what());
  }
  const auto window = field<std::size_t>(rec, "window", 1);
  std::vector<Rational> thresholds;
  for (const auto& t : rec.at("schedule")) thresholds.push_back(rational_from_json(t));
  const Schedule schedule = [&] {
    try {
      return Schedule(thresholds);
    } catch (const ConfigError& e) {
      throw DataError("format", std::string("artifact schedule: ") + e.what());
    }
  }();
  const auto corpus_fp = field<std::string>(rec, "corpus_fingerprint", 1);
  const auto config_fp = field<std::string>(rec, "config_fingerprint", 1);
  const auto n_tokens = field<std::size_t>(rec.at("counts"), "tokens", 1);
  const auto n_patterns = field<std::size_t>(rec.at("counts"), "patterns", 1);

  std::vector<Token> vocab;
  vocab.reserve(n_tokens);
  std::vector<Pattern> patterns;
  patterns.reserve(n_patterns);
  std::vector<ContextProfile> stored_profiles;
  std::vector<FamilyLevel> levels;

  bool have = reader.next(rec);
  while (have && rec["record"] == "token") {
    vocab.push_back(Token{field<TokenId>(rec, "id", reader.line()), field<std::string>(rec, "surface", reader.line())});
    have = reader.next(rec);
  }
  while (have && rec["record"] == "pattern") {
    patterns.push_back(Pattern{field<PatternId>(rec, "id", reader.line()),
                               field<TokenSeq>(rec, "tokens", reader.line()),
                               field<std::uint64_t>(rec, "count", reader.line()),
                               field<std::vector<std::size_t>>(rec, "lines", reader.line())});
    have = reader.next(rec);
  }
  while (have && rec["record"] == "profile") {
    ContextProfile prof;
    prof.token = field<TokenId>(rec, "token", reader.line());
    prof.mass = field<std::uint64_t>(rec, "mass", reader.line());
    for (const auto& f : rec.at("features")) {
      if (!f.is_array() || f.size() != 3) corrupt("malformed profile feature on line " + std::to_string(reader.line()));
      prof.features.push_back(FeatureCount{{f[0].get<std::int32_t>(), f[1].get<TokenId>()}, f[2].get<std::uint64_t>()});
    }
    stored_profiles.push_back(std::move(prof));
    have = reader.next(rec);
  }
  while (have && rec["record"] == "level") {
    const auto l = field<std::size_t>(rec, "level", reader.line());
    if (l != levels.size() + 1) corrupt("level records out of order at line " + std::to_string(reader.line()));
    const auto families = field<std::vector<std::vector<TokenId>>>(rec, "families", reader.line());
    std::vector<std::uint32_t> labels(vocab.size(), UINT32_MAX);
    for (std::size_t f = 0; f < families.size(); ++f) {
      for (TokenId t : families[f]) {
        if (t >= labels.size() || labels[t] != UINT32_MAX) corrupt("level " + std::to_string(l) + " is not a partition");
        labels[t] = static_cast<std::uint32_t>(f);
      }
    }
    for (auto lab : labels) {
      if (lab == UINT32_MAX) corrupt("level " + std::to_string(l) + " does not cover the vocabulary");
    }
    FamilyLevel lvl = partition_from_labels(labels, rational_from_json(rec.at("threshold")));
    if (lvl.families != families) corrupt("level " + std::to_string(l) + " families are not in canonical order");
    levels.push_back(std::move(lvl));
    have = reader.next(rec);
  }
  if (have) {
    throw DataError("format", "unexpected '" + rec["record"].get<std::string>() + "' record on line " +
                                  std::to_string(reader.line()));
  }
  if (vocab.size() != n_tokens || patterns.size() != n_patterns) {
    corrupt("token or pattern count differs from the header");
  }

  PopulationStore store = PopulationStore::assemble(std::move(vocab), std::move(patterns), ingest);
  if (hex64(store.corpus_fingerprint()) != corpus_fp) corrupt("corpus fingerprint mismatch");

  ContextIndex index = ContextIndex::build(store, window);
  std::size_t k = 0;
  for (const auto& prof : index.profiles()) {
    if (prof.features.empty()) continue;
    if (k >= stored_profiles.size() || stored_profiles[k] != prof) {
      corrupt("stored profile of token " + std::to_string(prof.token) + " disagrees with the patterns");
    }
    ++k;
  }
  if (k != stored_profiles.size()) corrupt("extra profile records");

  std::vector<std::uint32_t> identity(store.vocabulary_size());
  for (std::size_t t = 0; t < identity.size(); ++t) identity[t] = static_cast<std::uint32_t>(t);
  levels.insert(levels.begin(), partition_from_labels(identity, std::nullopt));
  FamilyHierarchy hierarchy = FamilyHierarchy::from_levels(std::move(levels));
  if (!(hierarchy.schedule() == schedule)) corrupt("level thresholds disagree with the header schedule");

  Engine engine = Engine::assemble(std::move(store), std::move(index), std::move(hierarchy));
  if (hex64(engine_config_fingerprint(engine)) != config_fp) corrupt("config fingerprint mismatch");
  return engine;
}

}  // namespace

Engine parse_artifact(std::string_view bytes) {
  try {
    return parse_artifact_records(bytes);
  } catch (const json::exception& e) {
    throw DataError("format", std::string("malformed artifact: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError("format", std::string("artifact configuration: ") + e.what());
  }
}

void save_artifact(const Engine& engine, const std::filesystem::path& path) {
  const std::string bytes = serialize_artifact(engine);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("io", "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw DataError("io", "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("io", "cannot move artifact into place at " + path.string() + ": " + ec.message());
  }
}

Engine load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("io", "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_artifact(buf.str());
}

std::string artifact_fingerprint(const Engine& engine) {
  return hex64(fnv1a64(serialize_artifact(engine)));
}

}  // namespace analog
