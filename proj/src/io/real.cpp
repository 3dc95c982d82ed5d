#include "fdvae/io/real.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fdvae/error.hpp"
#include "fdvae/estimators/estimators.hpp"
#include "fdvae/io/csv.hpp"
#include "fdvae/numerics/stats.hpp"

namespace fdvae::io {

namespace fs = std::filesystem;
using nlohmann::json;

void RealDatasetSpec::validate() const {
  if (treatment.empty() || outcome.empty()) throw DataError("real spec '" + name + "': treatment and outcome are required");
  if (proxies.empty()) throw DataError("real spec '" + name + "': at least one proxy column is required");
  std::set<std::string> seen{treatment};
  if (!seen.insert(outcome).second) throw DataError("real spec '" + name + "': outcome equals treatment");
  for (const auto& p : proxies) {
    if (!seen.insert(p).second) throw DataError("real spec '" + name + "': column '" + p + "' is used twice");
  }
  if (reference && !(reference->low < reference->high)) {
    throw DataError("real spec '" + name + "': reference interval needs low < high");
  }
}

RealDatasetSpec real_spec_from_json(const json& j, const fs::path& base_dir) {
  static const std::set<std::string> known{"name",          "csv",         "treatment",           "outcome",
                                           "proxies",       "treatment_threshold", "value_maps", "log_columns",
                                           "standardize_proxies", "standardize_outcome", "reference", "fdvae"};
  if (!j.is_object()) throw DataError("real spec: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw DataError("real spec: unknown key '" + key + "'");
  }
  RealDatasetSpec s;
  try {
    s.name = j.value("name", std::string("real"));
    const fs::path csv = j.at("csv").get<std::string>();
    s.csv = csv.is_absolute() || base_dir.empty() ? csv : base_dir / csv;
    s.treatment = j.at("treatment").get<std::string>();
    s.outcome = j.at("outcome").get<std::string>();
    s.proxies = j.at("proxies").get<std::vector<std::string>>();
    if (j.contains("treatment_threshold") && !j["treatment_threshold"].is_null()) {
      const json& th = j["treatment_threshold"];
      TreatmentThreshold rule;
      if (th.is_string()) {
        if (th.get<std::string>() != "median") throw DataError("real spec: treatment_threshold must be a number or \"median\"");
        rule.median = true;
      } else {
        rule.value = th.get<double>();
      }
      s.treatment_threshold = rule;
    }
    if (j.contains("value_maps")) s.value_maps = j["value_maps"].get<std::map<std::string, std::map<std::string, double>>>();
    if (j.contains("log_columns")) s.log_columns = j["log_columns"].get<std::vector<std::string>>();
    s.standardize_proxies = j.value("standardize_proxies", true);
    s.standardize_outcome = j.value("standardize_outcome", false);
    if (j.contains("reference") && !j["reference"].is_null()) {
      const json& r = j["reference"];
      ReferenceInterval ref{r.at("low").get<double>(), r.at("high").get<double>(), std::nullopt};
      if (r.contains("point") && !r["point"].is_null()) ref.point = r["point"].get<double>();
      s.reference = ref;
    }
    if (j.contains("fdvae")) s.fdvae = j["fdvae"];
  } catch (const json::exception& e) {
    throw DataError(std::string("real spec: ") + e.what());
  }
  s.validate();
  return s;
}

RealDatasetSpec load_real_spec(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return real_spec_from_json(j, path.parent_path());
}

namespace {

std::vector<double> column_values(const CsvTable& t, const RealDatasetSpec& spec, const std::string& name) {
  const std::size_t col = t.column(name);
  const auto map_it = spec.value_maps.find(name);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string& cell = t.rows[i][col];
    if (map_it != spec.value_maps.end()) {
      const auto hit = map_it->second.find(cell);
      if (hit != map_it->second.end()) {
        out.push_back(hit->second);
        continue;
      }
    }
    const auto v = parse_double(cell);
    if (!v || !std::isfinite(*v)) {
      throw DataError(spec.csv.string() + ": row " + std::to_string(i + 1) + ", column '" + name +
                      "': non-numeric cell '" + cell + "'");
    }
    out.push_back(*v);
  }
  if (std::find(spec.log_columns.begin(), spec.log_columns.end(), name) != spec.log_columns.end()) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!(out[i] > 0.0)) {
        throw DataError(spec.csv.string() + ": row " + std::to_string(i + 1) + ", column '" + name +
                        "': log transform needs a positive value");
      }
      out[i] = std::log(out[i]);
    }
  }
  return out;
}

std::pair<double, double> standardize(std::vector<double>& v, const std::string& name) {
  const double m = num::mean(v);
  const double s = num::sample_std(v);
  if (!(s > 0.0)) throw DataError("column '" + name + "' has zero variance and cannot be standardised");
  for (double& x : v) x = (x - m) / s;
  return {m, s};
}

}  // namespace

Dataset load_csv(const RealDatasetSpec& spec) {
  spec.validate();
  CsvTable t;
  try {
    t = read_csv(spec.csv);
  } catch (const IoError& e) {
    throw DataError(e.what());
  }
  const std::size_t n = t.rows.size();
  if (n == 0) throw DataError(spec.csv.string() + ": no data rows");
  Dataset d;

  std::vector<double> tr = column_values(t, spec, spec.treatment);
  json threshold = nullptr;
  if (spec.treatment_threshold) {
    double cut = spec.treatment_threshold->value;
    if (spec.treatment_threshold->median) {
      std::vector<double> sorted = tr;
      std::sort(sorted.begin(), sorted.end());
      cut = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    }
    for (double& v : tr) v = v >= cut ? 1.0 : 0.0;
    threshold = cut;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (tr[i] != 0.0 && tr[i] != 1.0) {
      throw DataError(spec.csv.string() + ": row " + std::to_string(i + 1) + ", column '" + spec.treatment +
                      "': treatment is not binary (set treatment_threshold to binarise it)");
    }
  }
  d.t = std::move(tr);

  d.y = column_values(t, spec, spec.outcome);
  json scale{{"mean", 0.0}, {"std", 1.0}, {"standardized", false}};
  if (spec.standardize_outcome) {
    const auto [m, s] = standardize(d.y, spec.outcome);
    scale = {{"mean", m}, {"std", s}, {"standardized", true}};
  }

  d.x = num::Tensor(n, spec.proxies.size());
  json proxy_stats = json::array();
  for (std::size_t j = 0; j < spec.proxies.size(); ++j) {
    std::vector<double> col = column_values(t, spec, spec.proxies[j]);
    if (spec.standardize_proxies) {
      const auto [m, s] = standardize(col, spec.proxies[j]);
      proxy_stats.push_back({{"column", spec.proxies[j]}, {"mean", m}, {"std", s}});
    }
    for (std::size_t i = 0; i < n; ++i) d.x(i, j) = col[i];
  }
  d.provenance = {{"source", "csv"},
                  {"spec", spec.name},
                  {"path", spec.csv.string()},
                  {"treatment", spec.treatment},
                  {"treatment_threshold", threshold},
                  {"outcome", spec.outcome},
                  {"proxies", spec.proxies},
                  {"log_columns", spec.log_columns},
                  {"outcome_scale", scale},
                  {"proxy_standardization", proxy_stats}};
  d.validate();
  return d;
}

double outcome_scale(const Dataset& d) {
  if (d.provenance.contains("outcome_scale")) return d.provenance["outcome_scale"].value("std", 1.0);
  return 1.0;
}

json to_json(const RealEvaluation& r) {
  json j{{"name", r.name},
         {"n", r.n},
         {"fdvae_frontdoor", r.fdvae_ate},
         {"backdoor_regression", r.backdoor_ate},
         {"naive", r.naive_ate}};
  if (r.reference) {
    j["reference"] = {{"low", r.reference->low}, {"high", r.reference->high}};
    if (r.reference->point) j["reference"]["point"] = *r.reference->point;
  }
  if (r.inside) j["inside_reference"] = *r.inside;
  return j;
}

RealEvaluation evaluate_real(const RealDatasetSpec& spec, const model::FdvaeConfig& base) {
  const Dataset d = load_csv(spec);
  json cfg = model::to_json(base);
  for (const auto& [k, v] : spec.fdvae.items()) cfg[k] = v;
  model::FdvaeConfig fc = model::fdvae_config_from_json(cfg);
  fc.batch_size = std::min(fc.batch_size, std::max<std::size_t>(1, d.n() / 2));

  const double scale = outcome_scale(d);
  const model::TrainResult tr = model::train(d, fc);
  const num::Tensor psi = model::infer_psi(tr.model, d);
  RealEvaluation r;
  r.name = spec.name;
  r.n = d.n();
  r.fdvae_ate = est::ate_frontdoor_plugin(psi, d.t, d.y).value * scale;
  r.backdoor_ate = est::ate_backdoor_regression(d.x, d.t, d.y).value * scale;
  r.naive_ate = est::naive_diff_means(d.t, d.y).value * scale;
  r.reference = spec.reference;
  if (spec.reference) r.inside = r.fdvae_ate > spec.reference->low && r.fdvae_ate < spec.reference->high;
  return r;
}

}  // namespace fdvae::io
