#pragma once

#include <filesystem>

#include "json.hpp"
#include "ved/model.hpp"

namespace ved {

nlohmann::json arch_to_json(const ArchConfig& arch);
ArchConfig arch_from_json(const nlohmann::json& j);

/// Writes `dir`/weights.bin (every parameter and buffer as f32le, in
/// parameters() then buffers() order) and `dir`/manifest.json (architecture,
/// tensor table and the caller's `info`).
void save_checkpoint(const std::filesystem::path& dir, VedModel<float>& model, const nlohmann::json& info = {});

struct LoadedCheckpoint {
  VedModel<float> model;
  nlohmann::json info;
};

/// Throws DataError for missing files or a tensor table that does not match
/// the stored architecture.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace ved
