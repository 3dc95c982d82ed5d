#pragma once
// Parameter checkpoint format (JSON):
//
//   {
//     "format": "fdvae-parameters",
//     "version": 1,
//     "metadata": { ... caller supplied ... },
//     "parameters": { "<name>": { "shape": [rows, cols], "values": [row-major] }, ... }
//   }
//
// Values are written with round-trip precision, so save/load is lossless.

#include <filesystem>
#include <json.hpp>

#include "fdvae/numerics/mlp.hpp"

namespace fdvae::num {

inline constexpr int kCheckpointVersion = 1;

nlohmann::json parameters_to_json(const ParameterSet& params, const nlohmann::json& metadata = nlohmann::json::object());

// Overwrites every tensor in `params` from the document. Names and shapes
// must match exactly; extra or missing entries throw DataError.
void parameters_from_json(const nlohmann::json& doc, ParameterSet& params);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace fdvae::num
