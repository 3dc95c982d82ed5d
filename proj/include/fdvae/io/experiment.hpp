#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdvae/model/fdvae.hpp"
#include "fdvae/synth/synth.hpp"

namespace fdvae::io {

enum class ExperimentMethod { fdvae_frontdoor, backdoor_regression, naive };

std::string_view to_string(ExperimentMethod m);
ExperimentMethod experiment_method_from_string(std::string_view s);

struct ExperimentSpec {
  std::string name = "experiment";
  synth::SweepAxis axis = synth::SweepAxis::sample_size;
  std::vector<double> values;
  std::size_t replications = 30;
  synth::SynthConfig base;
  model::FdvaeConfig fdvae;
  std::vector<ExperimentMethod> methods;
  // Baselines read X generated under this setting (same seed, so T, Y and
  // the hidden columns are shared with the main dataset).
  std::optional<synth::Setting> baseline_setting;
  std::filesystem::path output_dir;

  // Throws InvalidArgument.
  void validate() const;
};

nlohmann::json to_json(const ExperimentSpec& s);
// Unknown keys throw DataError; output_dir resolves against base_dir.
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct ResultRow {
  std::string experiment;
  synth::Setting setting = synth::Setting::A;
  synth::SweepAxis axis = synth::SweepAxis::sample_size;
  double axis_value = 0.0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  ExperimentMethod method = ExperimentMethod::naive;
  std::optional<double> ate_hat;
  std::optional<double> ate_true;
  std::optional<double> bias_pct;
  std::optional<double> pcc_psi_zfd;
  std::string error;  // empty on success
  double wall_clock_seconds = 0.0;

  bool ok() const noexcept { return error.empty(); }
};

struct RunOptions {
  std::size_t threads = 1;  // 0 = hardware concurrency
  // Called from worker threads after each replication finishes.
  std::function<void(const std::vector<ResultRow>&)> on_replication;
};

// Row order: axis value, replication, then the order of spec.methods.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const RunOptions& opts = {});

std::size_t expected_row_count(const ExperimentSpec& spec);

inline constexpr int kResultsSchemaVersion = 1;

std::string results_csv(const std::vector<ResultRow>& rows);
std::string timings_csv(const std::vector<ResultRow>& rows);
nlohmann::json summarize(const std::vector<ResultRow>& rows);
// One CSV per method present in rows, keyed by method name.
std::vector<std::pair<std::string, std::string>> plot_data(const std::vector<ResultRow>& rows);

// Writes results.csv, timings.csv, summary.json and plotdata/<method>.csv.
void emit_results(const std::vector<ResultRow>& rows, const std::filesystem::path& dir);

}  // namespace fdvae::io
