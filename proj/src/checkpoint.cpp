#include "fist/checkpoint.hpp"

#include <bit>
#include <fstream>

#include "fist/errors.hpp"

namespace fist::nn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts unsupported");

std::string bin_name(const std::string& param_name) {
  std::string s = param_name;
  for (char& c : s) {
    if (c == '.' || c == '/') c = '_';
  }
  return s + ".bin";
}

void write_f32(const std::filesystem::path& file, const Tensor& t) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for write: " + file.string());
  std::vector<float> buf(t.data.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(t.data[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw IoError("short write: " + file.string());
}

void read_f32(const std::filesystem::path& file, Tensor& t) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw MissingArtifactError("missing parameter file: " + file.string());
  std::vector<float> buf(t.data.size());
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float))) {
    throw TruncationError(file.string());
  }
  for (std::size_t i = 0; i < buf.size(); ++i) t.data[i] = static_cast<double>(buf[i]);
}

}  // namespace

void save_params(const ParamSet& ps, const std::filesystem::path& dir,
                 const nlohmann::json& meta) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["dtype"] = "f32";
  manifest["endianness"] = "little";
  manifest["params"] = nlohmann::json::array();
  for (const auto& p : ps) {
    const std::string file = bin_name(p.name);
    write_f32(dir / file, p.value);
    manifest["params"].push_back(
        {{"name", p.name}, {"rows", p.value.rows}, {"cols", p.value.cols}, {"file", file}});
  }
  manifest["meta"] = meta;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest: " + (dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
}

static nlohmann::json read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("missing checkpoint manifest: " + path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (manifest.value("format_version", -1) != 1) {
    throw VersionError(path.string() + " (format_version " +
                       manifest.value("format_version", nlohmann::json()).dump() + ")");
  }
  return manifest;
}

nlohmann::json load_params(ParamSet& ps, const std::filesystem::path& dir) {
  nlohmann::json manifest = read_manifest(dir);
  std::size_t seen = 0;
  for (const auto& entry : manifest["params"]) {
    const std::string name = entry["name"];
    if (!ps.contains(name)) throw IoError("checkpoint has unknown parameter: " + name);
    Param& p = ps.get(name);
    if (p.value.rows != entry["rows"].get<int>() || p.value.cols != entry["cols"].get<int>()) {
      throw ConfigError("checkpoint shape mismatch for " + name);
    }
    read_f32(dir / entry["file"].get<std::string>(), p.value);
    seen += 1;
  }
  if (seen != ps.size()) throw IoError("checkpoint is missing parameters for " + dir.string());
  return manifest.value("meta", nlohmann::json::object());
}

nlohmann::json read_checkpoint_meta(const std::filesystem::path& dir) {
  return read_manifest(dir).value("meta", nlohmann::json::object());
}

}  // namespace fist::nn
