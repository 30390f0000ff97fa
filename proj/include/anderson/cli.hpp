#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "anderson/field.hpp"

namespace anderson::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum Exit : int { ok = 0, failure = 1, schema = 2, budget = 3, assertion = 4 };

/// Reads keys from a JSON object and remembers which were used, so that
/// finish() can reject the rest. Type mismatches raise SchemaError.
class Section {
 public:
  explicit Section(const nlohmann::json& j);

  bool has(const std::string& key) const { return j_.contains(key); }
  const nlohmann::json& raw(const std::string& key);
  double number(const std::string& key, std::optional<double> def = std::nullopt);
  int integer(const std::string& key, std::optional<int> def = std::nullopt);
  bool boolean(const std::string& key, bool def);
  std::string string(const std::string& key, std::optional<std::string> def = std::nullopt);
  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def = std::nullopt);
  void finish() const;

 private:
  const nlohmann::json& j_;
  std::set<std::string> used_;
};

struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed_base;
};

/// Validated experiment description. `document` is the canonical resolved
/// config (seeds expanded), the input of the config hash.
struct ExperimentConfig {
  std::string kind;
  nlohmann::json document;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output;
  int jobs = 1;
  bool cache = false;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"spectrum", "ids", "weyl", "renorm-scan", "besov-scan", "additivity",
                                              "transform-check", "sample"};
  return kinds;
}

/// Parses and validates everything before any computation; SchemaError on failure.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& kind, const Overrides& o);

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunRecord {
  std::string config_hash;
  std::string version = kVersion;
  std::string experiment;
  double wall_clock = 0.0;
  int jobs = 1;
  std::map<std::string, std::string> artifacts;  // relative path -> SHA-256
  std::vector<Assertion> assertions;
  bool passed() const;
  nlohmann::ordered_json to_json() const;
};

/// Runs a validated experiment, writes its artifacts, run.json and a registry line.
RunRecord run(const ExperimentConfig& cfg);

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& p);
/// ANDERSON_CACHE_DIR, else $HOME/.cache/anderson.
std::filesystem::path cache_dir();
/// Appends one line to the registry under an exclusive file lock.
void append_registry(const std::filesystem::path& registry, const std::string& line);

/// Raw noise through the field cache, keyed by (kind, seed, grid, alpha).
Field cached_noise(const std::string& kind, const Grid& grid, std::uint64_t seed, double alpha, bool use_cache);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// Column index; SchemaError when missing.
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& p);

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::vector<double> lo, hi;  // optional band
};

struct Figure {
  std::string title, xlabel, ylabel;
  std::vector<Series> series;
};

/// Deterministic SVG rendering; an empty figure gets axes only.
std::string render_svg(const Figure& fig);
/// Builds the figure of a kind (ids, weyl, renorm, besov) from artifact files.
Figure make_figure(const std::string& kind, const std::vector<std::filesystem::path>& files, int dim);

/// Entry point of the `anderson` tool.
int main(int argc, char** argv);

}  // namespace anderson::cli
