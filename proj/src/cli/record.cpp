#include <fcntl.h>
#include <openssl/evp.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <thread>

#include "anderson/cli.hpp"
#include "anderson/error.hpp"
#include "anderson/field_io.hpp"
#include "anderson/format.hpp"
#include "anderson/noise.hpp"
#include "experiment.hpp"

namespace anderson::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
  }
  void update(const void* data, std::size_t size) { EVP_DigestUpdate(ctx_.get(), data, size); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

void write_text(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  os << content;
  if (!os) throw Error("could not write " + p.string());
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string file_sha256(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw Error("cannot read " + p.string());
  Sha256 h;
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof buf);
    h.update(buf, static_cast<std::size_t>(is.gcount()));
  }
  return h.hex();
}

fs::path cache_dir() {
  if (const char* dir = std::getenv("ANDERSON_CACHE_DIR"); dir && *dir) return dir;
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "anderson";
  return fs::temp_directory_path() / "anderson-cache";
}

void append_registry(const fs::path& registry, const std::string& line) {
  if (registry.has_parent_path()) fs::create_directories(registry.parent_path());
  const int fd = ::open(registry.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw Error("cannot open registry " + registry.string());
  ::flock(fd, LOCK_EX);
  const std::string text = line + "\n";
  const ssize_t written = ::write(fd, text.data(), text.size());
  ::flock(fd, LOCK_UN);
  ::close(fd);
  if (written != static_cast<ssize_t>(text.size())) throw Error("short write to registry");
}

Field cached_noise(const std::string& kind, const Grid& grid, std::uint64_t seed, double alpha, bool use_cache) {
  auto sample = [&] {
    if (kind == "white") return sample_white_noise(grid, seed);
    if (kind == "riesz") return sample_riesz_noise(grid, alpha, riesz_unit_constant(grid.dim(), alpha), seed);
    throw ParameterError("no sampler for noise kind '" + kind + "'");
  };
  if (!use_cache) return sample();

  std::ostringstream key;
  key << kVersion << '|' << kind << '|' << grid.dim() << '|' << grid.n() << '|' << fmt(grid.side()) << '|'
      << fmt(kind == "riesz" ? alpha : 0.0) << '|' << seed;
  const fs::path stem = cache_dir() / "fields" / sha256_hex(key.str());
  fs::path json = stem;
  json += ".json";
  if (fs::exists(json)) {
    try {
      return read_field(stem);
    } catch (const Error&) {
      // Unreadable entry: resample and overwrite it.
    }
  }
  Field f = sample();
  fs::create_directories(stem.parent_path());
  // Write under a unique name and rename, so concurrent writers never expose a partial entry.
  fs::path tmp = stem;
  tmp += ".tmp" + std::to_string(::getpid()) + "_" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  write_field(tmp, f);
  for (const char* ext : {".f64", ".json"}) {
    fs::path from = tmp, to = stem;
    from += ext;
    to += ext;
    fs::rename(from, to);
  }
  return f;
}

void Context::write(const std::string& rel, const std::string& content) {
  write_text(cfg.output / rel, content);
  add(rel);
}

void Context::check(const std::string& name, bool passed, const std::string& detail) {
  assertions.push_back({name, passed, detail});
}

bool RunRecord::passed() const {
  for (const Assertion& a : assertions)
    if (!a.passed) return false;
  return true;
}

ordered_json RunRecord::to_json() const {
  ordered_json j;
  j["config_hash"] = config_hash;
  j["version"] = version;
  j["experiment"] = experiment;
  j["wall_clock"] = wall_clock;
  j["jobs"] = jobs;
  j["artifacts"] = ordered_json::object();
  for (const auto& [path, digest] : artifacts) j["artifacts"][path] = digest;
  j["assertions"] = ordered_json::array();
  for (const Assertion& a : assertions) j["assertions"].push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  j["passed"] = passed();
  return j;
}

RunRecord run(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(cfg.output);

  // The canonical parameters re-parse to the same experiment.
  const auto exp = make_experiment(cfg.kind);
  Section params(cfg.document.at("params"));
  ordered_json canon;
  exp->parse(params, canon);
  params.finish();

  Context ctx{cfg, {}, {}, ordered_json::object()};
  exp->run(ctx);

  RunRecord rec;
  rec.config_hash = sha256_hex(cfg.document.dump());
  rec.experiment = cfg.kind;
  rec.jobs = cfg.jobs;

  ordered_json summary;
  summary["experiment"] = cfg.kind;
  summary["config_hash"] = rec.config_hash;
  summary["version"] = rec.version;
  summary["params"] = canon;
  summary["seeds"] = cfg.seeds;
  summary["results"] = ctx.summary;
  ctx.write("summary.json", summary.dump(2) + "\n");

  for (const std::string& rel : ctx.artifacts) rec.artifacts[rel] = file_sha256(cfg.output / rel);
  rec.assertions = ctx.assertions;
  rec.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(cfg.output / "run.json", rec.to_json().dump(2) + "\n");

  ordered_json line;
  line["time"] = utc_now();
  line["config_hash"] = rec.config_hash;
  line["experiment"] = rec.experiment;
  line["version"] = rec.version;
  line["output"] = fs::absolute(cfg.output).lexically_normal().string();
  line["wall_clock"] = rec.wall_clock;
  line["artifacts"] = rec.artifacts.size();
  line["passed"] = rec.passed();
  append_registry(cache_dir() / "registry.jsonl", line.dump());
  return rec;
}

}  // namespace anderson::cli
