#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cglasso/cli.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cglasso;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cglasso");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("cglasso_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("simulate, path, fit and roc end to end") {
  const auto dir = scratch("e2e");
  const auto sim = dir / "sim";
  auto r = cli({"simulate", "--p", "8", "--n", "60", "--H", "3", "--censor-prob", "0.3",
                "--edge-prob", "0.3", "--seed", "4", "--out", sim.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  REQUIRE(fs::exists(sim / "data.csv"));
  REQUIRE(fs::exists(sim / "truth.json"));

  const auto p1 = dir / "path1";
  r = cli({"path", "--input", (sim / "data.csv").string(), "--K", "6", "--rho-min", "0.01",
           "--out", p1.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto js = nlohmann::json::parse(slurp(p1 / "path.json"));
  CHECK(js["rhos"].size() == 6);
  CHECK(js["p"] == 8);
  CHECK(js["complete"] == true);
  CHECK(js["edge_counts"][0] == 0);
  for (const char* f : {"edges.tsv", "edges_abic.tsv"}) CHECK(fs::exists(p1 / f));

  // Same seed and output directory, different thread count: same files.
  const auto first_json = slurp(p1 / "path.json");
  const auto first_edges = slurp(p1 / "edges.tsv");
  r = cli({"path", "--input", (sim / "data.csv").string(), "--K", "6", "--rho-min", "0.01",
           "--out", p1.string(), "--threads", "2"});
  REQUIRE(r.code == 0);
  CHECK(slurp(p1 / "path.json") == first_json);
  CHECK(slurp(p1 / "edges.tsv") == first_edges);

  const auto f1 = dir / "fit";
  const double rho = js["rhos"][3];
  r = cli({"fit", "--input", (sim / "data.csv").string(), "--rho", std::to_string(rho), "--out",
           f1.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto fj = nlohmann::json::parse(slurp(f1 / "params.json"));
  CHECK(fj["theta"].size() == 64);
  CHECK(fj["mu"].size() == 8);
  CHECK(fs::exists(f1 / "edges.tsv"));

  const auto roc = dir / "roc";
  r = cli({"roc", "--truth", (sim / "truth.json").string(), "--path", (p1 / "path.json").string(),
           "--out", roc.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto text = slurp(roc / "roc.csv");
  CHECK(text.find("rho,tpr,fpr") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("glasso estimator and exact BIC options") {
  const auto dir = scratch("opts");
  REQUIRE(cli({"simulate", "--p", "5", "--n", "50", "--H", "2", "--seed", "2", "--out",
               dir.string()}).code == 0);
  auto r = cli({"path", "--input", (dir / "data.csv").string(), "--K", "4", "--estimator", "glasso",
                "--out", (dir / "g").string()});
  CHECK_MESSAGE(r.code == 0, r.err);
  r = cli({"path", "--input", (dir / "data.csv").string(), "--K", "4", "--exact-bic",
           "--bic-draws", "500", "--criterion", "bic", "--out", (dir / "b").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto js = nlohmann::json::parse(slurp(dir / "b" / "path.json"));
  CHECK(js["bic"].size() == 4);
  CHECK(js["criterion"] == "bic");
  CHECK(fs::exists(dir / "b" / "edges_bic.tsv"));
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  CHECK(cli({"bogus"}).code == kExitUsage);
  CHECK(cli({"fit", "--input", "x.csv"}).code == kExitUsage);  // --rho missing
  const auto missing = cli({"path", "--input", "/nonexistent/data.csv"});
  CHECK(missing.code == kExitData);
  CHECK_FALSE(missing.err.empty());
  CHECK(missing.err.find('\n') == missing.err.size() - 1);

  const auto dir = scratch("codes");
  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3\n";
  CHECK(cli({"path", "--input", (dir / "bad.csv").string()}).code == kExitData);
  std::ofstream(dir / "ok.csv") << "a,b\n1,2\n3,1\n2,2\n5,0\n";
  CHECK(cli({"path", "--input", (dir / "ok.csv").string(), "--rho-min", "1000"}).code == kExitUsage);
  CHECK(cli({"path", "--input", (dir / "ok.csv").string(), "--mode", "fancy"}).code == kExitUsage);
  fs::remove_all(dir);
}

TEST_CASE("benchmark with overrides writes the report files") {
  const auto dir = scratch("bench");
  std::ofstream(dir / "study.cfg") << "p = 6\nn = 30\nK = 4\nrho_min = 0.05\nsettings = 2\n";
  const auto r = cli({"benchmark", "--study", "model1", "--config", (dir / "study.cfg").string(),
                      "--set", "methods=cglasso,lod-glasso", "--replicates", "2", "--out",
                      (dir / "out").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto csv = slurp(dir / "out" / "replicates.csv");
  CHECK(csv.find("setting,replicate,seed,method") != std::string::npos);
  const auto agg = nlohmann::json::parse(slurp(dir / "out" / "aggregate.json"));
  CHECK(agg["config"]["p"] == 6);
  CHECK(agg["config"]["replicates"] == 2);
  CHECK(cli({"benchmark", "--study", "model1", "--set", "nonsense=1", "--out",
             (dir / "x").string()}).code == kExitUsage);
  fs::remove_all(dir);
}

TEST_CASE("run config round trips through json") {
  RunConfig c;
  c.input = "d.csv";
  c.upper = {40.0, 1e300};
  c.lower = {-kInf};
  c.na_side = {"right"};
  c.mode = EStepMode::Exact;
  c.rho = 0.25;
  c.spacing = Spacing::Log;
  c.threads = 8;
  const auto back = RunConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.rho.value() == 0.25);
  CHECK(back.lower[0] == -kInf);
  CHECK(c.to_json().find("threads") == std::string::npos);
}

TEST_CASE("the installed binary runs") {
  const std::string cmd = std::string(CGLASSO_CLI_PATH) + " --help > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
}
