#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fdvae/dataset.hpp"
#include "fdvae/model/fdvae.hpp"

namespace fdvae::io {

struct ReferenceInterval {
  double low = 0.0;
  double high = 0.0;
  std::optional<double> point;
};

// Binarisation rule for a non-binary treatment column: t = (value >= threshold).
struct TreatmentThreshold {
  bool median = false;  // use the column median as the threshold
  double value = 0.0;
};

struct RealDatasetSpec {
  std::string name;
  std::filesystem::path csv;  // relative paths resolve against the JSON file's directory
  std::string treatment;
  std::string outcome;
  std::vector<std::string> proxies;
  std::optional<TreatmentThreshold> treatment_threshold;
  // Per-column text -> number maps for categorical cells ("yes" -> 1).
  std::map<std::string, std::map<std::string, double>> value_maps;
  // Columns replaced by their natural log (after value maps); cells must be > 0.
  std::vector<std::string> log_columns;
  bool standardize_proxies = true;
  bool standardize_outcome = false;
  std::optional<ReferenceInterval> reference;
  nlohmann::json fdvae = nlohmann::json::object();  // FdvaeConfig overrides

  // Named columns nonempty and pairwise distinct. Throws DataError.
  void validate() const;
};

RealDatasetSpec real_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RealDatasetSpec load_real_spec(const std::filesystem::path& path);

// Dataset without hidden columns or true ATE. Standardisation constants are
// recorded under provenance["outcome_scale"] = {mean, std}.
Dataset load_csv(const RealDatasetSpec& spec);

// Multiplier taking an ATE on the dataset's outcome scale back to raw units.
double outcome_scale(const Dataset& d);

struct RealEvaluation {
  std::string name;
  double fdvae_ate = 0.0;  // original outcome scale
  double backdoor_ate = 0.0;
  double naive_ate = 0.0;
  std::optional<ReferenceInterval> reference;
  std::optional<bool> inside;  // fdvae_ate strictly within the reference interval
  std::size_t n = 0;
};

nlohmann::json to_json(const RealEvaluation& r);

// Loads, trains FDVAE with spec.fdvae overrides applied on top of `base`, and
// estimates the ATE.
RealEvaluation evaluate_real(const RealDatasetSpec& spec, const model::FdvaeConfig& base);

}  // namespace fdvae::io
