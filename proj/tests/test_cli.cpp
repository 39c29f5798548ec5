#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "popsym/cli.hpp"

using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = popsym::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args) {
  const auto r = run(std::move(args));
  REQUIRE(r.code == 0);
  return json::parse(r.out);
}

// One temporary file per call, removed with the returned guard.
struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name, const std::string& text)
      : path(std::filesystem::temp_directory_path() / ("popsym_cli_" + name)) {
    std::ofstream(path) << text;
  }
  ~TempFile() { std::filesystem::remove(path); }
};

bool one_error_line(const std::string& err, const std::string& kind) {
  return err.starts_with("error: " + kind + ": ") && err.find('\n') == err.size() - 1;
}

}  // namespace

TEST_CASE("validate majority reports no output-stable state") {
  const auto j = run_json({"validate", "--builtin", "majority"});
  CHECK(j["output_stable"].empty());
  CHECK(j["protocol"] == "majority");
}

TEST_CASE("validate count_to_x reports the alarm as disseminating") {
  const auto j = run_json({"validate", "--builtin", "count_to_x", "--x", "5"});
  CHECK(j["disseminating"] == json::array({"q5"}));
  CHECK(j["tree_depth_within_bound"] == true);
}

TEST_CASE("undeclared state in a protocol file is a domain error") {
  TempFile bad("bad.pp", "protocol bad\nstates: a, b\ninputs: 1 -> a\noutputs: b -> 1 ; default -> 0\nrules:\n  a c -> b b\n");
  const auto r = run({"validate", bad.path.string()});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "semantic"));
  CHECK(r.out.empty());
}

TEST_CASE("missing file and syntax errors exit 1") {
  auto r = run({"validate", "/nonexistent/popsym.pp"});
  CHECK(r.code == 1);
  TempFile broken("broken.pp", "protocol x\nstates: a\nrules:\n  a a => a a\n");
  r = run({"validate", broken.path.string()});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "syntax"));
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  auto r = run({"validate", "--builtin", "count_to_x"});
  CHECK(r.code == 2);
  CHECK(one_error_line(r.err, "usage"));
  CHECK(run({"symmetry", "--builtin", "parity", "--n", "4", "--mode", "fuzzy"}).code == 2);
  CHECK(run({"symmetry", "--builtin", "parity", "--n", "four"}).code == 2);
  CHECK(run({"experiment", "--builtin", "count_to_x", "--x", "5"}).code == 2);
  CHECK(run({"validate"}).code == 2);
}

TEST_CASE("help exits 0") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("symmetry") != std::string::npos);
}

TEST_CASE("exact symmetry of parity at n=4") {
  const auto j = run_json({"symmetry", "--builtin", "parity", "--n", "4", "--mode", "exact"});
  CHECK(j["exact_symmetry"] == 2);
  CHECK(j["expected_output"] == "0");
  const auto t = run({"symmetry", "--builtin", "parity", "--n", "4", "--format", "text"});
  CHECK(t.out.find("exact_symmetry=2") != std::string::npos);
}

TEST_CASE("scripted count_to_5 at N1=100") {
  const auto j = run_json({"symmetry", "--builtin", "count_to_x", "--x", "5", "--n1", "100", "--mode", "scripted"});
  CHECK(j["achieved_min_symmetry"] == 13);
  CHECK(j["replay_verified"] == true);
  CHECK(j["bound"]["satisfied"] == true);
  CHECK(j["bound"]["value"].get<double>() == doctest::Approx(12.0));
}

TEST_CASE("scripted k_majority with k=3") {
  const auto j = run_json(
      {"symmetry", "--builtin", "k_majority", "--k", "3", "--na", "13", "--nb", "12", "--mode", "scripted"});
  CHECK(j["achieved_min_symmetry"].get<int>() >= 3);
  CHECK(j["terminal_output"] == "1");
}

TEST_CASE("scripted mode rejects unsupported shapes") {
  auto r = run({"symmetry", "--builtin", "parity", "--n", "5", "--mode", "scripted"});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "unsupported_case"));
  r = run({"symmetry", "--builtin", "k_majority", "--k", "2", "--na", "9", "--nb", "3", "--mode", "scripted"});
  CHECK(r.code == 1);
}

TEST_CASE("exact mode over budget exits 1") {
  const auto r = run({"symmetry", "--builtin", "majority", "--na", "6", "--nb", "5", "--budget", "10"});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "analysis_limit"));
}

TEST_CASE("run majority stabilizes to 1") {
  const auto j = run_json({"run", "--builtin", "majority", "--na", "6", "--nb", "2", "--scheduler", "maxmatch",
                           "--seed", "7", "--format", "json"});
  CHECK(j["terminal"] == "stable");
  CHECK(j["output"] == "1");
  const auto t = run({"run", "--builtin", "majority", "--na", "6", "--nb", "2", "--scheduler", "maxmatch", "--seed", "7"});
  CHECK(t.out.find("terminal=stable output=1") != std::string::npos);
}

TEST_CASE("run is deterministic") {
  const std::vector<std::string> args{"run", "--builtin", "count_to_x", "--x", "5", "--n1", "300", "--seed", "11",
                                      "--format", "json"};
  CHECK(run(args).out == run(args).out);
}

TEST_CASE("experiment csv") {
  const auto r = run({"experiment", "--builtin", "count_to_x", "--x", "5", "--sizes", "100:300:100", "--reps", "4",
                      "--mode", "until_stability"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "protocol,n,repetition,seed,mode,steps,observed_min_symmetry,terminal");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 12);
}

TEST_CASE("experiment aggregate and fit files") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto agg = (dir / "popsym_cli_agg.csv").string();
  const auto fit = (dir / "popsym_cli_fit.json").string();
  const auto r = run({"experiment", "--builtin", "count_to_x", "--x", "5", "--sizes", "10,20,30,40,50", "--reps", "3",
                      "--aggregate", agg, "--fit", fit, "--out", (dir / "popsym_cli_runs.csv").string()});
  REQUIRE(r.code == 0);
  std::ifstream a(agg);
  std::string header;
  std::getline(a, header);
  CHECK(header == "protocol,n,mode,mean_symmetry,stddev,reps");
  std::ifstream f(fit);
  const json j = json::parse(f);
  CHECK(j["fits"].contains("until_stability"));
  CHECK(j["fits"].contains("until_alarm_majority"));
  CHECK(j["alarm_majority_dominates"].is_boolean());
  for (const char* p : {"popsym_cli_agg.csv", "popsym_cli_fit.json", "popsym_cli_runs.csv"})
    std::filesystem::remove(dir / p);
}

TEST_CASE("transform without output-stable states exits 1 citing the hypothesis") {
  TempFile p("noos.pp",
             "protocol swap\nstates: a, b\ninputs: x -> a, y -> b\noutputs: a -> 1 ; default -> 0\nrules:\n"
             "  a b -> b a\n  b a -> a b\n");
  auto r = run({"transform", "--file", p.path.string()});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "hypothesis"));
  r = run({"transform", "--builtin", "majority"});
  CHECK(r.code == 1);
}

TEST_CASE("transform output parses back") {
  const auto r = run({"transform", "--builtin", "count_to_x", "--x", "3"});
  REQUIRE(r.code == 0);
  TempFile t("t.pp", r.out);
  const auto j = run_json({"validate", t.path.string()});
  CHECK(j["disseminating"] == json::array({"q3"}));
}

TEST_CASE("exact mode on a file with an expected output") {
  TempFile p("flip.pp", "protocol flip\ninputs: 1 -> a\noutputs: b -> 1 ; default -> 0\nrules:\n  a a -> b b\n  sym: b a -> b b\n");
  const auto j = run_json({"symmetry", p.path.string(), "--init", "a=5", "--expect", "1"});
  CHECK(j["expected_output"] == "1");
  CHECK(j["exact_symmetry"].get<int>() >= 1);
  const auto r = run({"symmetry", p.path.string(), "--init", "a=5", "--expect", "maybe"});
  CHECK(r.code == 1);
}
