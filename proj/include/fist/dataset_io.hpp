#pragma once

#include <filesystem>

#include "fist/trajectory.hpp"

namespace fist::data {

// On-disk dataset layout: <dir>/manifest.json plus states.bin / actions.bin
// (little-endian float32, trajectories concatenated). The manifest carries
// dims, per-trajectory lengths, a CRC-32 per array and the format version;
// demo sets additionally store the goal descriptor. Round-tripping is
// bit-identical because trajectories store float32 in memory too.
void save_dataset(const TrajectoryDataset& ds, const std::filesystem::path& dir);
TrajectoryDataset load_dataset(const std::filesystem::path& dir);

void save_demos(const DemoSet& set, const std::filesystem::path& dir);
DemoSet load_demos(const std::filesystem::path& dir);

}  // namespace fist::data
