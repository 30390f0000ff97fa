#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "anderson/cli.hpp"
#include "anderson/error.hpp"

namespace anderson::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw SchemaError("cannot read config " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw SchemaError("config " + path + " is not valid JSON: " + e.what());
  }
}

int run_experiment(const std::string& kind, const std::string& config, const Overrides& o) {
  const ExperimentConfig cfg = parse_config(load_config(config), kind, o);
  const RunRecord rec = run(cfg);
  for (const Assertion& a : rec.assertions)
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << (a.detail.empty() ? "" : "  " + a.detail) << '\n';
  std::cout << kind << ": " << rec.artifacts.size() << " artifacts in " << cfg.output.string() << " ("
            << rec.config_hash.substr(0, 12) << ")\n";
  return rec.passed() ? Exit::ok : Exit::assertion;
}

int plot(const std::string& kind, const std::vector<std::string>& files, int dim, const std::string& out) {
  std::vector<fs::path> paths(files.begin(), files.end());
  const std::string svg = render_svg(make_figure(kind, paths, dim));
  const fs::path dest = out.empty() ? fs::path(kind + ".svg") : fs::path(out);
  if (dest.has_parent_path()) fs::create_directories(dest.parent_path());
  std::ofstream os(dest, std::ios::binary);
  os << svg;
  if (!os) throw Error("could not write " + dest.string());
  std::cout << dest.string() << '\n';
  return Exit::ok;
}

int report(const std::string& out) {
  const fs::path registry = cache_dir() / "registry.jsonl";
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  if (std::ifstream is{registry}) {
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      try {
        runs.push_back(nlohmann::ordered_json::parse(line));
      } catch (const json::parse_error&) {
        throw SchemaError("malformed registry line in " + registry.string());
      }
    }
  }
  const fs::path dest = (out.empty() ? fs::path(".") : fs::path(out)) / "report.json";
  fs::create_directories(dest.parent_path());
  std::ofstream(dest) << nlohmann::ordered_json{{"registry", registry.string()}, {"runs", runs}}.dump(2) << '\n';

  std::printf("%-20s  %-16s  %-12s  %6s  %10s  %s\n", "time", "experiment", "config", "passed", "seconds", "output");
  for (const auto& r : runs)
    std::printf("%-20s  %-16s  %-12s  %6s  %10.2f  %s\n", r.value("time", "").c_str(),
                r.value("experiment", "").c_str(), r.value("config_hash", "").substr(0, 12).c_str(),
                r.value("passed", false) ? "yes" : "no", r.value("wall_clock", 0.0), r.value("output", "").c_str());
  return Exit::ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anderson Hamiltonian experiments on periodic lattices"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config, out;
  int jobs = 0;
  std::uint64_t seed_base = 0;

  struct Command {
    std::string name, kind, help;
  };
  const std::vector<Command> commands{
      {"sample", "sample", "Sample white or Riesz noise fields"},
      {"renorm", "renorm-scan", "Renormalization constant against epsilon"},
      {"spectrum", "spectrum", "Smallest eigenvalues on a box"},
      {"ids", "ids", "Seed-averaged integrated density of states"},
      {"weyl", "weyl", "Weyl-law check of the counting function"},
      {"besov", "besov-scan", "Littlewood-Paley block norms of noise"},
      {"additivity", "additivity", "Dirichlet-Neumann bracketing and tiling inequalities"},
      {"transform-check", "transform-check", "Direct against transformed spectrum"},
  };
  std::vector<std::pair<CLI::App*, std::string>> experiment_apps;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed-base", seed_base, "First seed of the generated seed list");
    experiment_apps.emplace_back(sub, c.kind);
  }

  std::string plot_kind = "ids";
  int plot_dim = 2;
  std::vector<std::string> plot_files;
  CLI::App* plot_app = app.add_subcommand("plot", "Render SVG figures from CSV artifacts");
  plot_app->add_option("--kind", plot_kind, "ids, weyl, renorm or besov")
      ->check(CLI::IsMember({"ids", "weyl", "renorm", "besov"}));
  plot_app->add_option("--dim", plot_dim, "Spatial dimension of the data")->check(CLI::IsMember({2, 3}));
  plot_app->add_option("--out", out, "Output SVG path");
  plot_app->add_option("files", plot_files, "CSV artifacts");

  CLI::App* report_app = app.add_subcommand("report", "Summarize the run registry");
  report_app->add_option("--out", out, "Directory for report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return Exit::schema;
  }

  try {
    if (plot_app->parsed()) return plot(plot_kind, plot_files, plot_dim, out);
    if (report_app->parsed()) return report(out);
    for (const auto& [sub, kind] : experiment_apps) {
      if (!sub->parsed()) continue;
      Overrides o;
      if (sub->count("--out")) o.out = fs::path(out);
      if (sub->count("--jobs")) o.jobs = jobs;
      if (sub->count("--seed-base")) o.seed_base = seed_base;
      return run_experiment(kind, config, o);
    }
    return Exit::failure;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return Exit::schema;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return Exit::schema;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << '\n';
    return Exit::schema;
  } catch (const ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << '\n';
    return Exit::schema;
  } catch (const GuardError& e) {
    std::cerr << "guard error: " << e.what() << '\n';
    return Exit::schema;
  } catch (const ConvergenceError& e) {
    std::cerr << "budget exceeded: " << e.what() << " (best residual " << e.best_residual() << ")\n";
    return Exit::budget;
  } catch (const SaturationError& e) {
    std::cerr << "budget exceeded: " << e.what() << " (minimum norm " << e.min_norm() << ")\n";
    return Exit::budget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Exit::failure;
  }
}

}  // namespace anderson::cli
