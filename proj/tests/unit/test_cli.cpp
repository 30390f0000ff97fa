#include <doctest.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "anderson/cli.hpp"
#include "anderson/error.hpp"

using namespace anderson;
using namespace anderson::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path root = fs::temp_directory_path() / ("anderson_cli_test_" + std::to_string(::getpid()));
  static const bool init = [&] {
    fs::remove_all(root);
    fs::create_directories(root);
    ::setenv("ANDERSON_CACHE_DIR", (root / "cache").c_str(), 1);
    return true;
  }();
  (void)init;
  return root / name;
}

ExperimentConfig config(const std::string& kind, const json& j, const std::string& out, int jobs = 1) {
  Overrides o;
  o.out = scratch(out);
  o.jobs = jobs;
  return parse_config(j, kind, o);
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "anderson");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const json kIds = {{"L", {1, 2}},       {"epsilon", 0.125}, {"h", 0.0625},
                   {"bootstrap", 200},  {"n_seeds", 8},     {"lambda", {{"min", -20}, {"max", 40}, {"points", 25}}}};

}  // namespace

TEST_CASE("minimal spectrum config reports the Dirichlet ground state of the unit square") {
  const RunRecord rec = run(config("spectrum", {{"noise", "zero"}, {"n", 64}, {"k", 3}}, "spectrum"));
  CHECK(rec.passed());
  const json summary = json::parse(slurp(scratch("spectrum") / "summary.json"));
  const double l1 = summary["results"]["mean_lambda_1"].get<double>();
  CHECK(std::abs(l1 - 2.0 * std::numbers::pi * std::numbers::pi) / l1 < 1e-3);
  CHECK(rec.artifacts.count("spectrum.csv") == 1);
}

TEST_CASE("rerunning an identical config reproduces every artifact digest") {
  const json j = {{"epsilon", 0.125}, {"n", 16}, {"k", 4}, {"n_seeds", 2}};
  const RunRecord a = run(config("spectrum", j, "rerun_a"));
  const RunRecord b = run(config("spectrum", j, "rerun_b"));
  CHECK(a.config_hash == b.config_hash);
  CHECK(a.artifacts == b.artifacts);
  CHECK(a.artifacts.size() == 3);
}

TEST_CASE("ids config with two sizes writes one CSV per curve and one summary") {
  const RunRecord rec = run(config("ids", kIds, "ids"));
  CHECK(rec.passed());
  std::vector<std::string> csv, js;
  for (const auto& entry : fs::directory_iterator(scratch("ids"))) {
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() == ".csv") csv.push_back(name);
    if (name == "summary.json") js.push_back(name);
  }
  CHECK(csv.size() == 2);
  CHECK(js.size() == 1);
  CHECK(rec.artifacts.size() == 3);
  const json summary = json::parse(slurp(scratch("ids") / "summary.json"));
  CHECK(summary["results"]["curves"].size() == 2);
  CHECK(summary["results"]["curves"][0]["n_seeds"] == 8);
}

TEST_CASE("parallel runs agree with the serial run") {
  json j = kIds;
  j["bc"] = "both";
  const RunRecord serial = run(config("ids", j, "jobs1", 1));
  const RunRecord parallel = run(config("ids", j, "jobs3", 3));
  CHECK(serial.config_hash == parallel.config_hash);
  for (const auto& [name, digest] : serial.artifacts)
    if (name != "summary.json") CHECK_MESSAGE(parallel.artifacts.at(name) == digest, name);
  CHECK(serial.passed());
}

TEST_CASE("config validation happens before any compute") {
  CHECK_THROWS_AS(config("spectrum", {{"noise", "zero"}, {"bogus", 1}}, "x"), SchemaError);
  CHECK_THROWS_AS(config("spectrum", {{"noise", "white"}}, "x"), SchemaError);  // epsilon missing
  CHECK_THROWS_AS(config("ids", {{"epsilon", 0.1}, {"lambda", {{"min", 1}, {"max", 0}}}}, "x"), SchemaError);
  CHECK_THROWS_AS(config("ids", {{"epsilon", 0.1}, {"lambda", {{"step", 1}}}}, "x"), SchemaError);
  CHECK_THROWS_AS(config("weyl", {{"experiment", "ids"}}, "x"), SchemaError);
  CHECK_THROWS_AS(config("spectrum", {{"noise", "zero"}, {"seeds", {1, 2}}, {"n_seeds", 2}}, "x"), SchemaError);
  CHECK_THROWS_AS(config("besov-scan", {{"noise", "riesz"}}, "x"), SchemaError);  // alpha missing
  CHECK_THROWS_AS(config("spectrum", {{"noise", "zero"}, {"expect", {{"lambda_2", {1, 2}}}}}, "x"), SchemaError);
  CHECK_THROWS_AS(parse_config(json::object(), "bogus", {}), SchemaError);

  Overrides o;
  o.seed_base = 40;
  const ExperimentConfig cfg = parse_config({{"noise", "zero"}, {"n_seeds", 3}}, "spectrum", o);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{40, 41, 42});
}

TEST_CASE("config hash ignores output directory and parallelism") {
  const json j = {{"noise", "zero"}, {"n", 16}};
  const std::string a = sha256_hex(config("spectrum", j, "h1", 1).document.dump());
  const std::string b = sha256_hex(config("spectrum", j, "h2", 4).document.dump());
  CHECK(a == b);
  const std::string c = sha256_hex(config("spectrum", {{"noise", "zero"}, {"n", 32}}, "h3").document.dump());
  CHECK(a != c);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("exit codes separate schema, budget and assertion failures") {
  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << R"({"experiment":"spectrum","noise":"zero","unknown":3})";
  CHECK(invoke({"spectrum", "--config", bad.string(), "--out", scratch("bad").string()}) == Exit::schema);

  const fs::path broken = scratch("broken.json");
  std::ofstream(broken) << "{not json";
  CHECK(invoke({"spectrum", "--config", broken.string()}) == Exit::schema);
  CHECK(invoke({"spectrum", "--jobs", "0"}) == Exit::schema);

  // Expected range the zero-potential ground state cannot meet.
  const fs::path assert_cfg = scratch("assert.json");
  std::ofstream(assert_cfg) << R"({"noise":"zero","n":16,"k":1,"expect":{"lambda_1":[0,1]}})";
  CHECK(invoke({"spectrum", "--config", assert_cfg.string(), "--out", scratch("assert").string()}) == Exit::assertion);

  // A residual tolerance below rounding level exhausts the iteration budget.
  const fs::path budget = scratch("budget.json");
  std::ofstream(budget) << R"({"noise":"zero","n":64,"k":6,"tol":1e-15})";
  CHECK(invoke({"spectrum", "--config", budget.string(), "--out", scratch("budget").string()}) == Exit::budget);

  const fs::path good = scratch("good.json");
  std::ofstream(good) << R"({"noise":"zero","n":16,"k":1,"expect":{"lambda_1":[19,20]}})";
  CHECK(invoke({"spectrum", "--config", good.string(), "--out", scratch("good").string()}) == Exit::ok);
}

TEST_CASE("transform-check without a cutoff level that fits reports a budget error") {
  const fs::path cfg = scratch("saturate.json");
  std::ofstream(cfg) << R"({"epsilon":0.0625,"n":32,"gamma":1e-9,"n_seeds":1})";
  CHECK(invoke({"transform-check", "--config", cfg.string(), "--out", scratch("saturate").string()}) == Exit::budget);
}

TEST_CASE("plots are deterministic, and an empty curve gives an axis-only figure") {
  run(config("ids", kIds, "plot_ids"));
  const fs::path l1 = scratch("plot_ids") / "ids_dirichlet_L1.csv", l2 = scratch("plot_ids") / "ids_dirichlet_L2.csv";
  const std::string svg = render_svg(make_figure("ids", {l1, l2}, 2));
  CHECK(svg == render_svg(make_figure("ids", {l1, l2}, 2)));

  std::vector<std::string> legend;
  for (std::size_t at = svg.find("class=\"legend\""); at != std::string::npos;
       at = svg.find("class=\"legend\"", at + 1)) {
    const std::size_t open = svg.find('>', at) + 1;
    legend.push_back(svg.substr(open, svg.find('<', open) - open));
  }
  CHECK(legend == std::vector<std::string>{"1", "2"});
  CHECK(svg.find("<polygon") != std::string::npos);

  const fs::path empty = scratch("empty.csv");
  std::ofstream(empty) << "bc,L,epsilon,lambda,mean_count_per_volume,stderr,n_seeds\n";
  const std::string axes = render_svg(make_figure("ids", {empty}, 2));
  CHECK(axes.find("<line") != std::string::npos);
  CHECK(axes.find("<polyline") == std::string::npos);
  CHECK(invoke({"plot", "--kind", "ids", "--out", scratch("empty.svg").string(), empty.string()}) == Exit::ok);

  const fs::path missing = scratch("missing.csv");
  std::ofstream(missing) << "bc,L,lambda\ndirichlet,1,0\n";
  CHECK_THROWS_AS(make_figure("ids", {missing}, 2), SchemaError);
  CHECK(invoke({"plot", "--kind", "ids", missing.string()}) == Exit::schema);

  // Regenerating through the tool gives the same bytes.
  const fs::path a = scratch("a.svg"), b = scratch("b.svg");
  CHECK(invoke({"plot", "--kind", "ids", "--out", a.string(), l1.string(), l2.string()}) == Exit::ok);
  CHECK(invoke({"plot", "--kind", "ids", "--out", b.string(), l1.string(), l2.string()}) == Exit::ok);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("renorm, besov and weyl artifacts feed their plots") {
  run(config("renorm-scan", {{"n", 64}, {"epsilons", {0.25, 0.125, 0.0625}}}, "renorm"));
  CHECK(make_figure("renorm", {scratch("renorm") / "renorm.csv"}, 2).series.size() == 2);

  const RunRecord besov = run(config("besov-scan", {{"n", 64}, {"n_seeds", 4}, {"j_min", 0}}, "besov"));
  CHECK(besov.passed());
  const json s = json::parse(slurp(scratch("besov") / "summary.json"));
  CHECK(s["results"]["target_slope"] == 1.0);
  CHECK(make_figure("besov", {scratch("besov") / "besov.csv"}, 2).series.size() == 1);

  run(config("weyl", {{"n", 32}, {"lambda_max", 800}, {"points", 40}, {"min_count", 5}}, "weyl"));
  const Figure w = make_figure("weyl", {scratch("weyl") / "weyl.csv"}, 2);
  CHECK(w.series.size() == 2);
  CHECK(!render_svg(w).empty());
}

TEST_CASE("sample writes fields through the cache and reuses them") {
  const json j = {{"n", 32}, {"n_seeds", 2}};
  const RunRecord a = run(config("sample", j, "sample_a"));
  CHECK(a.artifacts.count("fields/white_1.f64") == 1);
  std::size_t cached = 0;
  for (const auto& e : fs::directory_iterator(cache_dir() / "fields")) cached += e.path().extension() == ".f64";
  CHECK(cached >= 2);
  const RunRecord b = run(config("sample", j, "sample_b"));
  CHECK(a.artifacts.at("fields/white_1.f64") == b.artifacts.at("fields/white_1.f64"));

  ExperimentConfig nocache = config("sample", {{"n", 32}, {"n_seeds", 2}, {"cache", false}}, "sample_c");
  CHECK(!nocache.cache);
  const RunRecord c = run(nocache);
  CHECK(c.artifacts.at("fields/white_2.f64") == a.artifacts.at("fields/white_2.f64"));
}

TEST_CASE("additivity experiment finds no violations and report lists the runs") {
  const RunRecord rec = run(config("additivity",
                                   {{"L", 1}, {"h", 0.0625}, {"n_seeds", 2}, {"lambda", {{"points", 20}}},
                                    {"ims", {{"tile", 0.5}, {"overlap", 0.125}}}},
                                   "additivity"));
  CHECK(rec.passed());
  CHECK(invoke({"report", "--out", scratch("report").string()}) == Exit::ok);
  const json report = json::parse(slurp(scratch("report") / "report.json"));
  CHECK(report["runs"].size() >= 5);
}
