#include "fist/dataset_io.hpp"

#include <array>
#include <bit>
#include <fstream>

#include <json.hpp>

#include "fist/errors.hpp"
#include "fist/hashing.hpp"

namespace fist {

std::uint32_t crc32(std::span<const unsigned char> bytes) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (unsigned char b : bytes) crc = table[(crc ^ b) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

std::uint32_t crc32(const void* data, std::size_t size) {
  return crc32({static_cast<const unsigned char*>(data), size});
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a_hex(std::string_view s) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a(s);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace fist

namespace fist::data {

namespace {

static_assert(std::endian::native == std::endian::little,
              "dataset format is little-endian; big-endian hosts unsupported");

std::vector<float> gather(const std::vector<Trajectory>& trajs, bool states) {
  std::vector<float> out;
  for (const auto& t : trajs) {
    const auto& src = states ? t.states : t.actions;
    out.insert(out.end(), src.begin(), src.end());
  }
  return out;
}

void write_array(const std::filesystem::path& file, const std::vector<float>& buf,
                 nlohmann::json& arrays) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for write: " + file.string());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw IoError("short write: " + file.string());
  arrays[file.filename().string()] = {
      {"crc32", fist::crc32(buf.data(), buf.size() * sizeof(float))},
      {"count", buf.size()},
  };
}

std::vector<float> read_array(const std::filesystem::path& file, const nlohmann::json& arrays) {
  const std::string name = file.filename().string();
  if (!arrays.contains(name)) throw IoError("manifest lacks array entry for " + name);
  const std::size_t count = arrays[name]["count"].get<std::size_t>();
  const std::uint32_t expect_crc = arrays[name]["crc32"].get<std::uint32_t>();

  std::ifstream in(file, std::ios::binary | std::ios::ate);
  if (!in) throw MissingArtifactError("missing array file: " + file.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size < count * sizeof(float)) throw TruncationError(file.string());
  if (size > count * sizeof(float)) throw ChecksumError(file.string() + " (trailing bytes)");
  in.seekg(0);
  std::vector<float> buf(count);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(size));
  if (in.gcount() != static_cast<std::streamsize>(size)) throw TruncationError(file.string());
  if (fist::crc32(buf.data(), size) != expect_crc) throw ChecksumError(file.string());
  return buf;
}

nlohmann::json base_manifest(const DatasetMeta& meta, const std::vector<Trajectory>& trajs,
                             const char* kind) {
  nlohmann::json m;
  m["format_version"] = 1;
  m["kind"] = kind;
  m["state_dim"] = meta.state_dim;
  m["action_dim"] = meta.action_dim;
  m["seed"] = meta.seed;
  m["config_hash"] = meta.config_hash;
  m["lengths"] = nlohmann::json::array();
  for (const auto& t : trajs) m["lengths"].push_back(t.length());
  return m;
}

void write_all(const std::filesystem::path& dir, nlohmann::json manifest,
               const std::vector<Trajectory>& trajs) {
  std::filesystem::create_directories(dir);
  nlohmann::json arrays;
  write_array(dir / "states.bin", gather(trajs, true), arrays);
  write_array(dir / "actions.bin", gather(trajs, false), arrays);
  manifest["arrays"] = arrays;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << "\n";
}

nlohmann::json read_manifest(const std::filesystem::path& dir, const char* kind) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw MissingArtifactError("missing dataset manifest: " + (dir / "manifest.json").string());
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
  }
  if (m.value("format_version", -1) != 1) {
    throw VersionError(dir.string() + " (format_version " +
                       m.value("format_version", nlohmann::json()).dump() + ")");
  }
  if (m.value("kind", "") != kind) {
    throw IoError("expected " + std::string(kind) + " at " + dir.string() + ", found '" +
                  m.value("kind", "") + "'");
  }
  return m;
}

std::vector<Trajectory> split_trajectories(const nlohmann::json& manifest,
                                           const std::vector<float>& states,
                                           const std::vector<float>& actions) {
  const int sd = manifest["state_dim"].get<int>();
  const int ad = manifest["action_dim"].get<int>();
  std::vector<Trajectory> out;
  std::size_t so = 0, ao = 0;
  for (const auto& len_j : manifest["lengths"]) {
    const auto len = len_j.get<std::size_t>();
    Trajectory t;
    t.state_dim = sd;
    t.action_dim = ad;
    t.states.assign(states.begin() + so, states.begin() + so + len * sd);
    t.actions.assign(actions.begin() + ao, actions.begin() + ao + len * ad);
    so += len * sd;
    ao += len * ad;
    out.push_back(std::move(t));
  }
  if (so != states.size() || ao != actions.size()) {
    throw IoError("manifest lengths inconsistent with array sizes");
  }
  return out;
}

DatasetMeta meta_from(const nlohmann::json& m) {
  return DatasetMeta{m["state_dim"].get<int>(), m["action_dim"].get<int>(),
                     m["seed"].get<std::uint64_t>(), m.value("config_hash", "")};
}

}  // namespace

void save_dataset(const TrajectoryDataset& ds, const std::filesystem::path& dir) {
  write_all(dir, base_manifest(ds.meta, ds.trajectories, "trajectory_dataset"), ds.trajectories);
}

TrajectoryDataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest = read_manifest(dir, "trajectory_dataset");
  const auto states = read_array(dir / "states.bin", manifest["arrays"]);
  const auto actions = read_array(dir / "actions.bin", manifest["arrays"]);
  TrajectoryDataset ds;
  ds.meta = meta_from(manifest);
  ds.trajectories = split_trajectories(manifest, states, actions);
  return ds;
}

void save_demos(const DemoSet& set, const std::filesystem::path& dir) {
  nlohmann::json manifest = base_manifest(set.meta, set.demos, "demo_set");
  manifest["goal"] = {{"x", set.goal.x},
                      {"y", set.goal.y},
                      {"radius", set.goal.radius},
                      {"region", set.goal.region}};
  write_all(dir, std::move(manifest), set.demos);
}

DemoSet load_demos(const std::filesystem::path& dir) {
  const auto manifest = read_manifest(dir, "demo_set");
  const auto states = read_array(dir / "states.bin", manifest["arrays"]);
  const auto actions = read_array(dir / "actions.bin", manifest["arrays"]);
  DemoSet set;
  set.meta = meta_from(manifest);
  set.demos = split_trajectories(manifest, states, actions);
  const auto& g = manifest.at("goal");
  set.goal = {g["x"].get<double>(), g["y"].get<double>(), g["radius"].get<double>(),
              g.value("region", "")};
  return set;
}

}  // namespace fist::data
