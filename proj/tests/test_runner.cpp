#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "falsify/runner.hpp"

using namespace falsify;
namespace fs = std::filesystem;

namespace {

// Scratch area shared by the file-producing tests; recreated per process.
fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "falsify_runner_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kRidgeSuite = R"(
param p1 in [0, 1] nominal 0.5;
param p2 in [0, 1] nominal 0.5;
step 1 { x1 = const(p1); x2 = const(p2); }
assess always: gap >= 0;
)";

// A run config against the ridge suite; requirement falsified when x1 > 0.8.
json easy_run_config(const std::string& suite_path,
                     const std::string& output_dir) {
  json j;
  j["plant"] = "ridge";
  j["test_suite"] = suite_path;
  j["requirement"] = {{"stl", "G[0,1](x1 <= 0.8)"}};
  j["dt"] = 0.5;
  j["search"] = {{"algorithm", "uniform_random"}, {"seed", 2}};
  j["budget"] = {{"max_evaluations", 200}};
  j["output_dir"] = output_dir;
  return j;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(FALSIFY_CLI_PATH) + " " + args;
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("parse_run_config rejects malformed documents by name") {
  json good = easy_run_config("suite.ts", "out");

  json missing_plant = good;
  missing_plant.erase("plant");
  CHECK_THROWS_WITH_AS(parse_run_config(missing_plant),
                       doctest::Contains("plant"), ConfigError);

  json two_sources = good;
  two_sources["requirement"]["source"] = "assessment";
  CHECK_THROWS_WITH_AS(parse_run_config(two_sources),
                       doctest::Contains("exactly one"), ConfigError);

  json no_source = good;
  no_source["requirement"] = json::object();
  CHECK_THROWS_AS(parse_run_config(no_source), ConfigError);

  json bad_weight = good;
  bad_weight["weight"] = 1.5;
  CHECK_THROWS_WITH_AS(parse_run_config(bad_weight),
                       doctest::Contains("weight"), ConfigError);

  json no_budget = good;
  no_budget.erase("budget");
  CHECK_THROWS_WITH_AS(parse_run_config(no_budget),
                       doctest::Contains("budget"), ConfigError);

  json bad_algo = good;
  bad_algo["search"]["algorithm"] = "gradient_descent";
  CHECK_THROWS_AS(parse_run_config(bad_algo), ConfigError);
}

TEST_CASE("run_falsify writes result.json, archive.csv and the failing trace") {
  fs::path dir = scratch() / "single";
  fs::create_directories(dir);
  write_file(dir / "suite.ts", kRidgeSuite);
  RunConfig cfg = parse_run_config(
      easy_run_config((dir / "suite.ts").string(), (dir / "out").string()));
  SearchResult result = run_falsify(cfg);
  REQUIRE(result.verdict == Verdict::Falsified);

  CHECK(fs::exists(dir / "out" / "result.json"));
  CHECK(fs::exists(dir / "out" / "archive.csv"));
  CHECK(fs::exists(dir / "out" / "falsifying_trace.csv"));

  json r = json::parse(slurp(dir / "out" / "result.json"));
  CHECK(r["verdict"] == "Falsified");
  CHECK(r["seed"] == 2);
  CHECK(r["evaluations"] == result.evaluations_used);
  CHECK(r["falsifying"]["params"].contains("p1"));
  CHECK(r["falsifying"]["params"]["p1"].get<double>() > 0.8);
  CHECK(r["config"]["plant"] == "ridge");

  // archive schema: header + one line per evaluation
  std::string archive = slurp(dir / "out" / "archive.csv");
  std::istringstream lines(archive);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "eval,param_1,param_2,raw_fa,raw_fm,combined,falsified,accepted");
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == result.evaluations_used);

  // the written trace parses and matches the in-memory one bit for bit
  Trace reread = read_csv(slurp(dir / "out" / "falsifying_trace.csv"));
  REQUIRE(result.falsifying_trace.has_value());
  CHECK(reread.names() == result.falsifying_trace->names());
  for (std::size_t k = 0; k < reread.sample_count(); ++k)
    for (std::size_t j = 0; j < reread.names().size(); ++j)
      CHECK(reread.value(k, j) == result.falsifying_trace->value(k, j));
}

TEST_CASE("result.json is deterministic once timing fields are removed") {
  fs::path dir = scratch() / "determinism";
  fs::create_directories(dir);
  write_file(dir / "suite.ts", kRidgeSuite);
  json base = easy_run_config((dir / "suite.ts").string(), "");
  json a_doc, b_doc;
  for (auto* slot : {&a_doc, &b_doc}) {
    json cfg_json = base;
    cfg_json["output_dir"] =
        (dir / (slot == &a_doc ? "out_a" : "out_b")).string();
    run_falsify(parse_run_config(cfg_json));
    *slot = json::parse(
        slurp(fs::path(cfg_json["output_dir"].get<std::string>()) /
              "result.json"));
    slot->erase("elapsed_seconds");
    slot->erase("timestamp");
    (*slot)["config"].erase("output_dir");
  }
  CHECK(a_doc == b_doc);
  CHECK(slurp(dir / "out_a" / "archive.csv") ==
        slurp(dir / "out_b" / "archive.csv"));
}

TEST_CASE("campaign produces one row per run in order, plus a summary") {
  fs::path dir = scratch() / "campaign";
  fs::create_directories(dir);
  write_file(dir / "suite.ts", kRidgeSuite);

  CampaignConfig cfg;
  cfg.base = parse_run_config(
      easy_run_config((dir / "suite.ts").string(), (dir / "out").string()));
  cfg.base.budget.max_evaluations = 100;
  cfg.repetitions = 5;
  cfg.base_seed = 10;
  cfg.algorithm_sweep = {SearchAlgorithm::UniformRandom,
                         SearchAlgorithm::SimulatedAnnealing};

  CampaignOutcome outcome = run_campaign(cfg, 2);
  REQUIRE(outcome.rows.size() == 10);
  REQUIRE(outcome.summary.size() == 2);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(outcome.rows[i].sweep_value == "uniform_random");
    CHECK(outcome.rows[i].run == i + 1);
    CHECK(outcome.rows[i].seed == 10 + i);
  }
  for (std::size_t i = 5; i < 10; ++i)
    CHECK(outcome.rows[i].sweep_value == "simulated_annealing");
  for (const auto& sp : outcome.summary) CHECK(sp.total == 5);

  std::string csv = campaign_csv(outcome);
  CHECK(csv.rfind("sweep_value,run,seed,verdict,evals_to_falsify,elapsed\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

TEST_CASE("a one-repetition campaign agrees with a standalone search") {
  fs::path dir = scratch() / "campaign_one";
  fs::create_directories(dir);
  write_file(dir / "suite.ts", kRidgeSuite);
  RunConfig base = parse_run_config(
      easy_run_config((dir / "suite.ts").string(), (dir / "out").string()));
  base.budget.max_evaluations = 150;

  CampaignConfig cfg;
  cfg.base = base;
  cfg.repetitions = 1;
  cfg.base_seed = 17;

  CampaignOutcome outcome = run_campaign(cfg);
  REQUIRE(outcome.rows.size() == 1);

  SearchConfig sc = base.search;
  sc.seed = 17;
  SearchResult direct = run_search(build_problem(base), sc, base.budget);
  CHECK(outcome.rows[0].verdict ==
        (direct.verdict == Verdict::Falsified ? "Falsified" : "NFF"));
  if (direct.verdict == Verdict::Falsified) {
    REQUIRE(outcome.rows[0].evals_to_falsify.has_value());
    CHECK(*outcome.rows[0].evals_to_falsify ==
          direct.archive[direct.falsifying_index].evaluation);
  }
}

TEST_CASE("cli: plants and compile subcommands succeed") {
  fs::path dir = scratch() / "cli_misc";
  fs::create_directories(dir);
  CHECK(run_cli("plants > " + (dir / "plants.txt").string()) == 0);
  std::string listing = slurp(dir / "plants.txt");
  CHECK(listing.find("cruise_control") != std::string::npos);
  CHECK(listing.find("water_tank") != std::string::npos);
  CHECK(listing.find("ridge") != std::string::npos);

  write_file(dir / "suite.ts", kRidgeSuite);
  CHECK(run_cli("compile " + (dir / "suite.ts").string() + " > " +
                (dir / "compile.txt").string()) == 0);
  std::string compiled = slurp(dir / "compile.txt");
  CHECK(compiled.find("p1 in [0, 1]") != std::string::npos);
  CHECK(compiled.find("G[0,1](gap >= 0)") != std::string::npos);
}

TEST_CASE("cli: robustness evaluates a formula against a trace file") {
  fs::path dir = scratch() / "cli_rho";
  fs::create_directories(dir);
  Trace tr(0, 1, {"x"}, {{1.0}, {2.0}, {3.0}});
  write_file(dir / "trace.csv", write_csv(tr));
  CHECK(run_cli("robustness \"G[0,2](x <= 5)\" " + (dir / "trace.csv").string() +
                " > " + (dir / "rho.txt").string()) == 0);
  CHECK(std::stod(slurp(dir / "rho.txt")) == 2.0);
  // parse errors surface as exit 1
  CHECK(run_cli("robustness \"G[0,2](x <=\" " + (dir / "trace.csv").string() +
                " 2> /dev/null") == 1);
}

TEST_CASE("cli: falsify exit codes and FALSIFY_SEED override") {
  fs::path dir = scratch() / "cli_falsify";
  fs::create_directories(dir);
  write_file(dir / "suite.ts", kRidgeSuite);
  write_file(dir / "run.json",
             easy_run_config("suite.ts", (dir / "out").string()).dump(2));

  std::string cfg_arg = (dir / "run.json").string();
  CHECK(run_cli("falsify " + cfg_arg + " > /dev/null") == 0);
  CHECK(run_cli("falsify " + cfg_arg + " --fail-on-falsify > /dev/null") == 2);
  CHECK(run_cli("falsify " + (dir / "missing.json").string() +
                " 2> /dev/null") == 1);

  // the environment override must land in result.json
  int status = std::system(("FALSIFY_SEED=77 " + std::string(FALSIFY_CLI_PATH) +
                            " falsify " + cfg_arg + " > /dev/null")
                               .c_str());
  REQUIRE(WEXITSTATUS(status) == 0);
  json r = json::parse(slurp(dir / "out" / "result.json"));
  CHECK(r["seed"] == 77);
}

TEST_CASE("cli: campaign writes campaign.csv") {
  fs::path dir = scratch() / "cli_campaign";
  fs::create_directories(dir);
  write_file(dir / "suite.ts", kRidgeSuite);
  json run = easy_run_config("suite.ts", (dir / "out").string());
  run["budget"]["max_evaluations"] = 60;
  json campaign;
  campaign["run"] = run;
  campaign["repetitions"] = 3;
  campaign["base_seed"] = 1;
  campaign["sweep"] = {{"algorithms", {"uniform_random"}}};
  campaign["output_dir"] = (dir / "out").string();
  write_file(dir / "campaign.json", campaign.dump(2));

  CHECK(run_cli("campaign " + (dir / "campaign.json").string() +
                " > /dev/null") == 0);
  std::string csv = slurp(dir / "out" / "campaign.csv");
  CHECK(csv.rfind("sweep_value,run,seed,verdict,evals_to_falsify,elapsed\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
