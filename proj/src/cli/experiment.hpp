#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "anderson/cli.hpp"

namespace anderson::cli {

struct Context {
  const ExperimentConfig& cfg;
  std::vector<Assertion> assertions;
  std::vector<std::string> artifacts;  // paths relative to the output directory
  nlohmann::ordered_json summary;

  /// Writes a text artifact under the output directory.
  void write(const std::string& rel, const std::string& content);
  /// Registers a file written by other means.
  void add(const std::string& rel) { artifacts.push_back(rel); }
  void check(const std::string& name, bool passed, const std::string& detail = {});
};

class Experiment {
 public:
  virtual ~Experiment() = default;
  virtual int default_seeds() const { return 1; }
  /// Reads and validates the kind-specific keys; writes them, defaults resolved, to `canon`.
  virtual void parse(Section& s, nlohmann::ordered_json& canon) = 0;
  virtual void run(Context& ctx) = 0;
};

std::unique_ptr<Experiment> make_experiment(const std::string& kind);

}  // namespace anderson::cli
