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

// Drives the analog binary as a subprocess and checks exit codes and records.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"

#ifndef ANALOG_CLI
#error "ANALOG_CLI must name the analog binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::vector<json> records;  // parsed when run with json-lines
};

Run run(const std::string& args) {
  const std::string cmd = std::string(ANALOG_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::istringstream in(r.out);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] == '{') r.records.push_back(json::parse(line));
  }
  return r;
}

std::vector<json> of_kind(const Run& r, const std::string& kind) {
  std::vector<json> out;
  for (const auto& j : r.records) {
    if (j["record"] == kind) out.push_back(j);
  }
  return out;
}

fs::path scratch() {
  auto d = fs::temp_directory_path() / "analog_cli_test";
  fs::create_directories(d);
  return d;
}

std::string build(const std::string& fixture) {
  const auto out = scratch() / (fixture + ".idx");
  auto r = run("build " + testfx::fixture_path(fixture).string() + " -o " + out.string());
  REQUIRE(r.status == 0);
  return out.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("build is deterministic and echoes config") {
  const auto a = build("fixture_bar_door");
  const std::string first = slurp(a);
  const auto b = build("fixture_bar_door");
  CHECK(slurp(b) == first);
  auto r = run("--format json-lines build " + testfx::fixture_path("fixture_bar_door").string() + " -o " + a);
  REQUIRE(r.status == 0);
  REQUIRE(!r.records.empty());
  CHECK(r.records[0]["record"] == "header");
  CHECK(r.records[0]["config"]["window"] == 2);
  CHECK(r.records[0]["config"]["schedule"] == "identity,3/4,1/2,1/4,0/1");
}

TEST_CASE("score: door/gate candidates") {
  const auto idx = build("fixture_bar_door");
  auto r = run("--format json-lines score " + idx + " 'bar the door' 'shut the gate' 'zebra the door' --explain");
  REQUIRE(r.status == 0);
  auto js = of_kind(r, "judgment");
  REQUIRE(js.size() == 3);
  CHECK(js[0]["nn_score"] == "1/2");
  CHECK(js[0]["nn_score_decimal"] == "0.500000");
  CHECK(js[0]["level"] == 0);
  CHECK(js[0]["tie"] == true);
  CHECK(js[0]["supports"].size() == 3);
  CHECK(js[1]["nn_score"] == "1/1");
  CHECK(js[2]["nn_score"] == "0/1");
  CHECK(js[2]["oov"] == true);
  CHECK(js[2]["oov_tokens"] == json::array({"zebra"}));

  auto tsv = run("score " + idx + " 'bar the door'");
  CHECK(tsv.status == 0);
  CHECK(tsv.out.rfind("header\t", 0) == 0);
  CHECK(tsv.out.find("judgment\t") != std::string::npos);
  CHECK(tsv.out.find("nn_score=1/2") != std::string::npos);
}

TEST_CASE("score reads candidates from a file") {
  const auto idx = build("fixture_bar_door");
  const auto f = scratch() / "cands.txt";
  std::ofstream(f) << "bar the door\n\nshut the gate\n";
  auto r = run("--format json-lines score " + idx + " --candidates-file " + f.string());
  CHECK(r.status == 0);
  CHECK(of_kind(r, "judgment").size() == 2);
}

TEST_CASE("families and neighbors") {
  const auto idx = build("fixture_bar_door");
  auto r = run("--format json-lines families " + idx + " --theta 1/2");
  REQUIRE(r.status == 0);
  int multi = 0;
  for (const auto& f : of_kind(r, "family")) multi += f["size"].get<int>() > 1;
  CHECK(multi == 2);

  auto n = run("--format json-lines neighbors " + idx + " door --theta 1/2");
  REQUIRE(n.status == 0);
  auto ns = of_kind(n, "neighbor");
  REQUIRE(ns.size() == 1);
  CHECK(ns[0]["neighbor"] == "gate");
  CHECK(ns[0]["similarity"] == "1/2");

  // bar's only neighbor is shut at 1/2: nothing at 3/4, still success
  auto empty = run("--format json-lines neighbors " + idx + " bar --theta 3/4");
  CHECK(empty.status == 0);
  CHECK(of_kind(empty, "neighbor").empty());
  CHECK(of_kind(empty, "header").size() == 1);
}

TEST_CASE("ablate deleting (3) emits a made/done tie in recompute mode") {
  const auto idx = build("fixture_historians");
  auto r = run("--format json-lines ablate " + idx + " --delete 2 --mode recompute '" + testfx::kMade + "' '" +
               testfx::kDone + "'");
  REQUIRE(r.status == 0);
  auto ties = of_kind(r, "tie");
  REQUIRE(ties.size() == 1);
  CHECK(ties[0]["step"] == 1);
  CHECK(ties[0]["nn_score"] == "3/5");
}

TEST_CASE("degrade is byte-identical across runs") {
  const auto idx = build("fixture_draw_zebra");
  const std::string args = "--seed 5 degrade " + idx + " --fraction 1/4 --steps 2 'draw the door' 'zebra the door'";
  auto a = run(args);
  auto b = run(args);
  CHECK(a.status == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("summary\t") != std::string::npos);
}

TEST_CASE("config file mirrors the global flags") {
  const auto cfg = scratch() / "run.conf";
  std::ofstream(cfg) << "window=1\nschedule=\"identity,1/2,0\"\nformat=json-lines\n";
  const auto out = scratch() / "w1.idx";
  auto r = run("--config " + cfg.string() + " build " + testfx::fixture_path("fixture_bar_door").string() +
               " -o " + out.string());
  REQUIRE(r.status == 0);
  REQUIRE(!r.records.empty());
  CHECK(r.records[0]["config"]["window"] == 1);
  CHECK(r.records[0]["config"]["schedule"] == "identity,1/2,0/1");
}

TEST_CASE("exit codes: usage/config errors are 1, data errors are 2") {
  const auto idx = build("fixture_bar_door");
  CHECK(run("").status == 1);
  CHECK(run("frobnicate").status == 1);
  CHECK(run("--window 0 build " + testfx::fixture_path("fixture_bar_door").string() + " -o /tmp/x.idx").status == 1);
  auto sched = run("--format json-lines --schedule 1/2,3/4 build " +
                   testfx::fixture_path("fixture_bar_door").string() + " -o " + (scratch() / "s.idx").string());
  CHECK(sched.status == 1);
  CHECK(!fs::exists(scratch() / "s.idx"));
  REQUIRE(of_kind(sched, "error").size() == 1);
  CHECK(of_kind(sched, "error")[0]["code"] == "config");
  CHECK(run("--tau 0 score " + idx + " 'bar the door'").status == 1);

  CHECK(run("score /nonexistent.idx 'a b'").status == 2);
  auto unknown = run("--format json-lines neighbors " + idx + " zebra");
  CHECK(unknown.status == 2);
  REQUIRE(of_kind(unknown, "error").size() == 1);
  CHECK(of_kind(unknown, "error")[0]["message"].get<std::string>().find("zebra") != std::string::npos);
  CHECK(run("score " + idx + " 'bar'").status == 2);  // too short to judge

  const auto empty = scratch() / "empty.txt";
  std::ofstream(empty) << "# nothing\n";
  CHECK(run("build " + empty.string() + " -o " + (scratch() / "e.idx").string()).status == 2);

  const auto bad = scratch() / "bad.idx";
  std::ofstream(bad) << slurp(idx).substr(0, 200);
  CHECK(run("score " + bad.string() + " 'bar the door'").status == 2);

  const auto hist = build("fixture_historians");
  CHECK(run("ablate " + hist + " --delete 0,1,2,3 'a b'").status == 2);
  CHECK(run("ablate " + hist + " --delete 9 'a b'").status == 2);
}
