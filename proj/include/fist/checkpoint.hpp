#pragma once

#include <filesystem>

#include <json.hpp>

#include "fist/params.hpp"

namespace fist::nn {

// Parameter checkpoint: <dir>/manifest.json plus one little-endian raw
// 32-bit-float .bin per parameter. "meta" is stored verbatim so models can
// persist their configuration next to the weights.
void save_params(const ParamSet& ps, const std::filesystem::path& dir,
                 const nlohmann::json& meta);

// Loads values into an already-constructed ParamSet; shapes must match.
// Returns the manifest's "meta" object.
nlohmann::json load_params(ParamSet& ps, const std::filesystem::path& dir);

// Reads just the manifest's "meta" object (for model reconstruction).
nlohmann::json read_checkpoint_meta(const std::filesystem::path& dir);

}  // namespace fist::nn
