#include "fdvae/io/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "fdvae/error.hpp"
#include "fdvae/estimators/estimators.hpp"
#include "fdvae/io/csv.hpp"
#include "fdvae/numerics/rng.hpp"
#include "fdvae/numerics/stats.hpp"

namespace fdvae::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ExperimentMethod m) {
  switch (m) {
    case ExperimentMethod::fdvae_frontdoor: return "fdvae_frontdoor";
    case ExperimentMethod::backdoor_regression: return "backdoor_regression";
    case ExperimentMethod::naive: return "naive";
  }
  return "naive";
}

ExperimentMethod experiment_method_from_string(std::string_view s) {
  if (s == "fdvae_frontdoor") return ExperimentMethod::fdvae_frontdoor;
  if (s == "backdoor_regression") return ExperimentMethod::backdoor_regression;
  if (s == "naive") return ExperimentMethod::naive;
  throw InvalidArgument("unknown method '" + std::string(s) + "' (expected fdvae_frontdoor, backdoor_regression or naive)");
}

void ExperimentSpec::validate() const {
  if (replications == 0) throw InvalidArgument("experiment '" + name + "': replications must be >= 1");
  if (methods.empty()) throw InvalidArgument("experiment '" + name + "': at least one method is required");
  std::set<ExperimentMethod> seen(methods.begin(), methods.end());
  if (seen.size() != methods.size()) throw InvalidArgument("experiment '" + name + "': duplicate method");
  base.validate();
  fdvae.validate();
  // Expanding validates the axis values.
  (void)synth::sweep_configs(base, axis, values, 1);
}

json to_json(const ExperimentSpec& s) {
  json methods = json::array();
  for (auto m : s.methods) methods.push_back(std::string(to_string(m)));
  json j{{"name", s.name},
         {"axis", std::string(synth::to_string(s.axis))},
         {"values", s.values},
         {"replications", s.replications},
         {"base", synth::to_json(s.base)},
         {"fdvae", model::to_json(s.fdvae)},
         {"methods", methods}};
  if (s.baseline_setting) j["baseline_setting"] = std::string(synth::to_string(*s.baseline_setting));
  if (!s.output_dir.empty()) j["output_dir"] = s.output_dir.string();
  return j;
}

ExperimentSpec experiment_spec_from_json(const json& j, const fs::path& base_dir) {
  static const std::set<std::string> known{"name", "axis",    "values",           "replications", "base",
                                           "fdvae", "methods", "baseline_setting", "output_dir"};
  if (!j.is_object()) throw DataError("experiment spec: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw DataError("experiment spec: unknown key '" + key + "'");
  }
  ExperimentSpec s;
  try {
    s.name = j.value("name", s.name);
    s.axis = synth::sweep_axis_from_string(j.at("axis").get<std::string>());
    s.values = j.at("values").get<std::vector<double>>();
    s.replications = j.value("replications", s.replications);
    if (j.contains("base")) s.base = synth::synth_config_from_json(j["base"]);
    if (j.contains("fdvae")) s.fdvae = model::fdvae_config_from_json(j["fdvae"]);
    for (const auto& m : j.at("methods")) s.methods.push_back(experiment_method_from_string(m.get<std::string>()));
    if (j.contains("baseline_setting") && !j["baseline_setting"].is_null()) {
      s.baseline_setting = synth::setting_from_string(j["baseline_setting"].get<std::string>());
    }
    if (j.contains("output_dir")) {
      const fs::path out = j["output_dir"].get<std::string>();
      s.output_dir = out.is_absolute() || base_dir.empty() ? out : base_dir / out;
    }
    s.validate();
  } catch (const json::exception& e) {
    throw DataError(std::string("experiment spec: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("experiment spec: ") + e.what());
  }
  return s;
}

ExperimentSpec load_experiment_spec(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return experiment_spec_from_json(j, path.parent_path());
}

std::size_t expected_row_count(const ExperimentSpec& spec) {
  return spec.values.size() * spec.replications * spec.methods.size();
}

namespace {

std::vector<ResultRow> run_point(const ExperimentSpec& spec, const synth::SweepPoint& point) {
  using clock = std::chrono::steady_clock;
  std::vector<ResultRow> rows;
  ResultRow proto;
  proto.experiment = spec.name;
  proto.setting = point.config.setting;
  proto.axis = spec.axis;
  proto.axis_value = point.axis_value;
  proto.replication = point.replication;
  proto.seed = point.config.seed;

  std::optional<Dataset> data, baseline;
  std::string data_error;
  try {
    data = synth::generate(point.config);
    if (spec.baseline_setting && *spec.baseline_setting != point.config.setting) {
      synth::SynthConfig bc = point.config;
      bc.setting = *spec.baseline_setting;
      baseline = synth::generate(bc);
    }
  } catch (const std::exception& e) {
    data_error = std::string("data generation failed: ") + e.what();
  }

  for (ExperimentMethod method : spec.methods) {
    ResultRow row = proto;
    row.method = method;
    const auto start = clock::now();
    if (!data) {
      row.error = data_error;
      rows.push_back(row);
      continue;
    }
    try {
      const Dataset& d = *data;
      row.ate_true = d.true_ate;
      switch (method) {
        case ExperimentMethod::fdvae_frontdoor: {
          model::FdvaeConfig fc = spec.fdvae;
          fc.seed = num::mix_seed(spec.fdvae.seed, point.config.seed);
          const model::TrainResult tr = model::train(d, fc);
          const num::Tensor psi = model::infer_psi(tr.model, d);
          row.ate_hat = est::ate_frontdoor_plugin(psi, d.t, d.y).value;
          row.pcc_psi_zfd = std::abs(num::pcc(psi.col(0), d.hidden->z_fd.col(0)));
          break;
        }
        case ExperimentMethod::backdoor_regression:
          row.ate_hat = est::ate_backdoor_regression(baseline ? baseline->x : d.x, d.t, d.y).value;
          break;
        case ExperimentMethod::naive:
          row.ate_hat = est::naive_diff_means(d.t, d.y).value;
          break;
      }
      if (row.ate_true) row.bias_pct = est::estimation_bias(*row.ate_hat, *row.ate_true);
      if (!std::isfinite(*row.ate_hat)) throw TrainingDivergence("non-finite estimate", "ate_hat");
    } catch (const TrainingDivergence& e) {
      row.ate_hat.reset();
      row.bias_pct.reset();
      row.pcc_psi_zfd.reset();
      row.error = std::string("divergence (") + e.culprit() + "): " + e.what();
    } catch (const std::exception& e) {
      row.ate_hat.reset();
      row.bias_pct.reset();
      row.pcc_psi_zfd.reset();
      row.error = e.what();
    }
    row.wall_clock_seconds = std::chrono::duration<double>(clock::now() - start).count();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const RunOptions& opts) {
  spec.validate();
  const std::vector<synth::SweepPoint> points = synth::sweep_configs(spec.base, spec.axis, spec.values, spec.replications);
  std::vector<std::vector<ResultRow>> slots(points.size());
  std::size_t threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = std::min(threads, points.size());

  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      slots[i] = run_point(spec, points[i]);
      if (opts.on_replication) {
        std::lock_guard lock(callback_mutex);
        opts.on_replication(slots[i]);
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<ResultRow> rows;
  rows.reserve(expected_row_count(spec));
  for (auto& s : slots) {
    for (auto& r : s) rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

struct Moments {
  std::size_t n = 0;
  json mean = nullptr;
  json std = nullptr;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  m.n = v.size();
  if (!v.empty()) m.mean = num::mean(v);
  if (v.size() >= 2) m.std = num::sample_std(v);
  return m;
}

json moments_json(const std::vector<double>& v) {
  const Moments m = moments(v);
  return {{"n", m.n}, {"mean", m.mean}, {"std", m.std}};
}

struct Group {
  std::size_t n_ok = 0, n_error = 0;
  std::vector<double> bias, pcc, ate;
};

// Keyed by method name then axis value, in first-appearance order of methods.
std::vector<std::pair<std::string, std::map<double, Group>>> group_rows(const std::vector<ResultRow>& rows) {
  std::vector<std::pair<std::string, std::map<double, Group>>> out;
  for (const auto& r : rows) {
    const std::string name(to_string(r.method));
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == name; });
    if (it == out.end()) {
      out.emplace_back(name, std::map<double, Group>{});
      it = out.end() - 1;
    }
    Group& g = it->second[r.axis_value];
    if (!r.ok()) {
      ++g.n_error;
      continue;
    }
    ++g.n_ok;
    if (r.bias_pct) g.bias.push_back(*r.bias_pct);
    if (r.pcc_psi_zfd) g.pcc.push_back(*r.pcc_psi_zfd);
    if (r.ate_hat) g.ate.push_back(*r.ate_hat);
  }
  return out;
}

std::string json_opt(const json& j) { return j.is_null() ? std::string() : format_double(j.get<double>()); }

}  // namespace

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out =
      "experiment,setting,axis,axis_value,replication,seed,method,ate_hat,ate_true,bias_pct,pcc_psi_zfd,status,error\n";
  for (const auto& r : rows) {
    out += csv_escape(r.experiment) + ',' + std::string(synth::to_string(r.setting)) + ',' +
           std::string(synth::to_string(r.axis)) + ',' + format_double(r.axis_value) + ',' +
           std::to_string(r.replication) + ',' + std::to_string(r.seed) + ',' + std::string(to_string(r.method)) + ',' +
           opt(r.ate_hat) + ',' + opt(r.ate_true) + ',' + opt(r.bias_pct) + ',' + opt(r.pcc_psi_zfd) + ',' +
           (r.ok() ? "ok" : "error") + ',' + csv_escape(r.error) + '\n';
  }
  return out;
}

std::string timings_csv(const std::vector<ResultRow>& rows) {
  std::string out = "experiment,axis_value,replication,method,wall_clock_seconds\n";
  for (const auto& r : rows) {
    out += csv_escape(r.experiment) + ',' + format_double(r.axis_value) + ',' + std::to_string(r.replication) + ',' +
           std::string(to_string(r.method)) + ',' + format_double(r.wall_clock_seconds) + '\n';
  }
  return out;
}

json summarize(const std::vector<ResultRow>& rows) {
  json groups = json::array();
  for (const auto& [method, by_value] : group_rows(rows)) {
    for (const auto& [value, g] : by_value) {
      groups.push_back({{"method", method},
                        {"axis_value", value},
                        {"n_ok", g.n_ok},
                        {"n_error", g.n_error},
                        {"bias_pct", moments_json(g.bias)},
                        {"pcc_psi_zfd", moments_json(g.pcc)},
                        {"ate_hat", moments_json(g.ate)}});
    }
  }
  json j{{"results_schema_version", kResultsSchemaVersion}, {"groups", groups}};
  if (!rows.empty()) {
    j["experiment"] = rows.front().experiment;
    j["axis"] = std::string(synth::to_string(rows.front().axis));
  }
  return j;
}

std::vector<std::pair<std::string, std::string>> plot_data(const std::vector<ResultRow>& rows) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [method, by_value] : group_rows(rows)) {
    std::string csv = "axis_value,n_ok,n_error,mean_bias_pct,std_bias_pct,mean_pcc_psi_zfd,std_pcc_psi_zfd,mean_ate_hat\n";
    for (const auto& [value, g] : by_value) {
      const Moments b = moments(g.bias), p = moments(g.pcc), a = moments(g.ate);
      csv += format_double(value) + ',' + std::to_string(g.n_ok) + ',' + std::to_string(g.n_error) + ',' +
             json_opt(b.mean) + ',' + json_opt(b.std) + ',' + json_opt(p.mean) + ',' + json_opt(p.std) + ',' +
             json_opt(a.mean) + '\n';
    }
    out.emplace_back(method, std::move(csv));
  }
  return out;
}

void emit_results(const std::vector<ResultRow>& rows, const fs::path& dir) {
  write_text_file(dir / "results.csv", results_csv(rows));
  write_text_file(dir / "timings.csv", timings_csv(rows));
  write_text_file(dir / "summary.json", summarize(rows).dump(2) + "\n");
  for (const auto& [method, csv] : plot_data(rows)) write_text_file(dir / "plotdata" / (method + ".csv"), csv);
}

}  // namespace fdvae::io
