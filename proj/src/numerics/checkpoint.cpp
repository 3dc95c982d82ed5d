#include "fdvae/numerics/checkpoint.hpp"

#include <fstream>

#include "fdvae/error.hpp"

namespace fdvae::num {

nlohmann::json parameters_to_json(const ParameterSet& params, const nlohmann::json& metadata) {
  nlohmann::json doc;
  doc["format"] = "fdvae-parameters";
  doc["version"] = kCheckpointVersion;
  doc["metadata"] = metadata;
  nlohmann::json ps = nlohmann::json::object();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& t = params.value(i);
    ps[params.name(i)] = {{"shape", {t.rows(), t.cols()}},
                          {"values", std::vector<double>(t.values().begin(), t.values().end())}};
  }
  doc["parameters"] = std::move(ps);
  return doc;
}

void parameters_from_json(const nlohmann::json& doc, ParameterSet& params) {
  try {
    if (doc.at("format").get<std::string>() != "fdvae-parameters") {
      throw DataError("checkpoint: unexpected format tag");
    }
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw DataError("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto& ps = doc.at("parameters");
    if (ps.size() != params.size()) {
      throw DataError("checkpoint: holds " + std::to_string(ps.size()) + " parameter blocks, model expects " +
                      std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::string& name = params.name(i);
      if (!ps.contains(name)) throw DataError("checkpoint: missing parameter '" + name + "'");
      const auto& entry = ps.at(name);
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      auto values = entry.at("values").get<std::vector<double>>();
      Tensor& dst = params.value(i);
      if (shape.size() != 2 || shape[0] != dst.rows() || shape[1] != dst.cols() || values.size() != dst.size()) {
        throw DataError("checkpoint: shape mismatch for '" + name + "', expected " + dst.shape_string());
      }
      dst = Tensor(shape[0], shape[1], std::move(values));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace fdvae::num
