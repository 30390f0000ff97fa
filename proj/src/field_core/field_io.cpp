#include "anderson/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "anderson/error.hpp"

namespace anderson {

static_assert(std::endian::native == std::endian::little, "field files are little-endian");

namespace {
std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  return std::filesystem::path(stem.string() + ext);
}
}  // namespace

void write_field(const std::filesystem::path& stem, const Field& f) {
  const Grid& g = f.grid();
  nlohmann::ordered_json h;
  h["d"] = g.dim();
  h["n"] = g.n();
  h["L"] = g.side();
  h["space"] = "physical";
  h["kind"] = to_string(f.meta().kind);
  h["alpha"] = f.meta().alpha;
  h["seed"] = f.meta().seed;
  h["epsilon"] = f.meta().epsilon;
  std::ofstream js(with_ext(stem, ".json"));
  js << h.dump(2) << '\n';
  std::ofstream bin(with_ext(stem, ".f64"), std::ios::binary);
  bin.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!bin || !js) throw Error("could not write field " + stem.string());
}

Field read_field(const std::filesystem::path& stem) {
  std::ifstream js(with_ext(stem, ".json"));
  if (!js) throw SchemaError("missing field header " + with_ext(stem, ".json").string());
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(js);
    if (h.at("space").get<std::string>() != "physical") throw SchemaError("only physical-space fields are stored");
    Grid g(h.at("d").get<int>(), h.at("L").get<double>(), h.at("n").get<int>());
    FieldMeta meta{noise_kind_from_string(h.at("kind").get<std::string>()), h.value("alpha", 0.0),
                   h.at("seed").get<std::uint64_t>(), h.at("epsilon").get<double>()};
    std::vector<double> v(g.size());
    std::ifstream bin(with_ext(stem, ".f64"), std::ios::binary);
    bin.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!bin || bin.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double)))
      throw SchemaError("field payload shorter than header declares");
    return Field(g, std::move(v), meta);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad field header: ") + e.what());
  }
}

}  // namespace anderson
