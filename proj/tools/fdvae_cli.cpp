#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fdvae/error.hpp"
#include "fdvae/estimators/estimators.hpp"
#include "fdvae/graph/builders.hpp"
#include "fdvae/graph/criteria.hpp"
#include "fdvae/graph/scm.hpp"
#include "fdvae/io/csv.hpp"
#include "fdvae/io/experiment.hpp"
#include "fdvae/io/real.hpp"
#include "fdvae/model/fdvae.hpp"
#include "fdvae/numerics/stats.hpp"
#include "fdvae/synth/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fdvae;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kDivergence = 3 };

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t threads = 1;
  bool quiet = false;
};

json read_json(const fs::path& p) {
  try {
    return json::parse(io::read_text_file(p));
  } catch (const json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

void say(const Globals& g, const std::string& line) {
  if (!g.quiet) std::cout << line << '\n';
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// gen ----------------------------------------------------------------------

struct GenArgs {
  std::string config;
  std::string setting;
  std::optional<std::size_t> n, d_zfd, d_x;
  std::optional<double> u_scale;
  std::string y_kind, x_kind;
};

int run_gen(const Globals& g, const GenArgs& a) {
  synth::SynthConfig c = a.config.empty() ? synth::SynthConfig{} : synth::synth_config_from_json(read_json(a.config));
  if (!a.setting.empty()) c.setting = synth::setting_from_string(a.setting);
  if (a.n) c.n = *a.n;
  if (a.d_zfd) c.d_zfd = *a.d_zfd;
  if (a.d_x) c.d_x = *a.d_x;
  if (a.u_scale) c.u_scale = *a.u_scale;
  if (!a.y_kind.empty()) c.y_kind = synth::var_kind_from_string(a.y_kind);
  if (!a.x_kind.empty()) c.x_kind = synth::var_kind_from_string(a.x_kind);
  if (g.seed) c.seed = *g.seed;
  const fs::path out = g.out.empty() ? fs::path("dataset.csv") : fs::path(g.out);
  const Dataset d = synth::generate(c);
  io::write_dataset(d, out);
  say(g, "wrote " + out.string() + " (n=" + std::to_string(d.n()) + ", d_x=" + std::to_string(d.d_x()) +
             ", true_ate=" + io::format_double(*d.true_ate) + ")");
  return kOk;
}

// train --------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string config;
  std::optional<std::size_t> epochs, d_psi;
};

model::FdvaeConfig fdvae_config(const Globals& g, const std::string& path, std::optional<std::size_t> epochs,
                                std::optional<std::size_t> d_psi) {
  model::FdvaeConfig c = path.empty() ? model::FdvaeConfig{} : model::fdvae_config_from_json(read_json(path));
  if (epochs) {
    c.epochs = *epochs;
    c.restart_epochs = std::min(c.restart_epochs, c.epochs);
  }
  if (d_psi) c.d_psi = *d_psi;
  if (g.seed) c.seed = *g.seed;
  c.validate();
  return c;
}

int run_train(const Globals& g, const TrainArgs& a) {
  const model::FdvaeConfig c = fdvae_config(g, a.config, a.epochs, a.d_psi);
  const Dataset d = io::read_dataset(a.data);
  const fs::path dir = g.out.empty() ? fs::path("fdvae_out") : fs::path(g.out);
  fs::create_directories(dir);
  std::ofstream log(dir / "train_log.jsonl", std::ios::trunc);
  if (!log) throw IoError("cannot open " + (dir / "train_log.jsonl").string());
  const model::TrainResult r = model::train(d, c, {.log = &log});
  model::save_checkpoint(r.model, dir / "checkpoint.json");
  const auto& last = r.report.epochs.back().train;
  json report{{"epochs_run", r.report.epochs.size()},
              {"final_epoch", r.report.final_epoch},
              {"chosen_restart", r.report.chosen_restart},
              {"restart_losses", r.report.restart_losses},
              {"final_train", model::to_json(last)}};
  io::write_text_file(dir / "report.json", report.dump(2) + "\n");
  say(g, "trained " + std::to_string(r.report.epochs.size()) + " epochs, final loss " + io::format_double(last.total) +
             "; checkpoint at " + (dir / "checkpoint.json").string());
  return kOk;
}

// estimate -----------------------------------------------------------------

struct EstimateArgs {
  std::string data;
  std::string checkpoint;
  bool quadratic = false;
};

int run_estimate(const Globals& g, const EstimateArgs& a) {
  const Dataset d = io::read_dataset(a.data);
  const est::RegressionOptions ro{.quadratic_features = a.quadratic};
  json out{{"n", d.n()}};
  auto add = [&](const char* name, double v) {
    out[name]["ate_hat"] = v;
    if (d.true_ate) out[name]["bias_pct"] = est::estimation_bias(v, *d.true_ate);
  };
  if (!a.checkpoint.empty()) {
    const model::FdvaeModel m = model::load_checkpoint(a.checkpoint);
    const num::Tensor psi = model::infer_psi(m, d);
    add("fdvae_frontdoor", est::ate_frontdoor_plugin(psi, d.t, d.y, ro).value);
    if (d.hidden) out["fdvae_frontdoor"]["pcc_psi_zfd"] = std::abs(num::pcc(psi.col(0), d.hidden->z_fd.col(0)));
  }
  add("backdoor_regression", est::ate_backdoor_regression(d.x, d.t, d.y, ro).value);
  add("naive", est::naive_diff_means(d.t, d.y).value);
  if (d.hidden) add("oracle_frontdoor", est::ate_frontdoor_plugin(d.hidden->z_fd, d.t, d.y, ro).value);
  if (d.true_ate) out["ate_true"] = *d.true_ate;
  if (!g.out.empty()) io::write_text_file(g.out, out.dump(2) + "\n");
  say(g, out.dump(2));
  return kOk;
}

// bench --------------------------------------------------------------------

struct BenchArgs {
  std::string spec;
};

int run_bench(const Globals& g, const BenchArgs& a) {
  io::ExperimentSpec spec = io::load_experiment_spec(a.spec);
  if (g.seed) spec.base.seed = *g.seed;
  if (!g.out.empty()) spec.output_dir = g.out;
  if (spec.output_dir.empty()) spec.output_dir = fs::path("results") / spec.name;
  const std::size_t total = spec.values.size() * spec.replications;
  std::size_t done = 0;
  io::RunOptions ro;
  ro.threads = g.threads;
  if (!g.quiet) {
    ro.on_replication = [&](const std::vector<io::ResultRow>& rows) {
      ++done;
      std::cerr << "[" << done << "/" << total << "] " << synth::to_string(spec.axis) << "="
                << io::format_double(rows.front().axis_value) << " rep " << rows.front().replication << '\n';
    };
  }
  const auto rows = io::run_experiment(spec, ro);
  io::emit_results(rows, spec.output_dir);
  std::size_t errors = 0, divergences = 0;
  for (const auto& r : rows) {
    if (!r.ok()) {
      ++errors;
      if (r.error.rfind("divergence", 0) == 0) ++divergences;
    }
  }
  say(g, "wrote " + std::to_string(rows.size()) + " rows (" + std::to_string(errors) + " errors) to " +
             spec.output_dir.string());
  if (divergences) return kDivergence;
  return errors ? kData : kOk;
}

// check-dag ----------------------------------------------------------------

struct DagArgs {
  std::string file;
  std::string treatment, outcome, frontdoor, backdoor;
};

int run_check_dag(const Globals& g, const DagArgs& a) {
  const json doc = read_json(a.file);
  const graph::Dag dag = graph::dag_from_json(doc);
  auto pick = [&](const std::string& name, graph::Role role, const char* what) {
    if (!name.empty()) return dag.id(name);
    if (auto r = dag.find_role(role)) return *r;
    throw InvalidArgument(std::string("no ") + what + " given and none tagged in the graph");
  };
  const graph::NodeId t = pick(a.treatment, graph::Role::treatment, "treatment");
  const graph::NodeId y = pick(a.outcome, graph::Role::outcome, "outcome");
  auto ids = [&](const std::string& list) {
    graph::NodeSet z;
    for (const auto& n : split_names(list)) z.push_back(dag.id(n));
    return z;
  };
  json out{{"treatment", dag.name(t)}, {"outcome", dag.name(y)}};
  std::optional<graph::DiscreteScm> scm;
  if (doc.contains("cpts")) scm = graph::scm_from_json(doc);
  std::optional<graph::ProbTable> joint;
  if (scm) {
    joint = graph::joint_distribution(*scm);
    out["interventional_ate"] = graph::discrete_ate(*scm, t, y);
  }
  if (!a.frontdoor.empty()) {
    const graph::NodeSet z = ids(a.frontdoor);
    const graph::FrontdoorVerdict v = graph::check_frontdoor(dag, z, t, y);
    out["frontdoor"] = {{"set", split_names(a.frontdoor)},
                        {"intercepts_directed_paths", v.intercepts_directed_paths},
                        {"no_backdoor_treatment_to_set", v.no_backdoor_treatment_to_set},
                        {"set_to_outcome_blocked_by_treatment", v.set_to_outcome_blocked_by_treatment},
                        {"valid", v.valid()}};
    if (scm && v.valid()) out["frontdoor"]["adjusted_ate"] = graph::frontdoor_ate(*scm, *joint, z, t, y);
  }
  if (!a.backdoor.empty()) {
    const graph::NodeSet z = ids(a.backdoor);
    const bool ok = graph::is_valid_backdoor_set(dag, z, t, y);
    out["backdoor"] = {{"set", split_names(a.backdoor)}, {"valid", ok}};
    if (scm && ok) out["backdoor"]["adjusted_ate"] = graph::backdoor_ate(*scm, *joint, z, t, y);
  }
  if (!g.out.empty()) io::write_text_file(g.out, out.dump(2) + "\n");
  say(g, out.dump(2));
  return kOk;
}

// eval-real ----------------------------------------------------------------

struct RealArgs {
  std::string spec;
  std::string config;
  std::optional<std::size_t> epochs;
};

int run_eval_real(const Globals& g, const RealArgs& a) {
  const io::RealDatasetSpec spec = io::load_real_spec(a.spec);
  const model::FdvaeConfig c = fdvae_config(g, a.config, a.epochs, std::nullopt);
  const io::RealEvaluation r = io::evaluate_real(spec, c);
  const json out = io::to_json(r);
  if (!g.out.empty()) io::write_text_file(g.out, out.dump(2) + "\n");
  say(g, out.dump(2));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Front-door representation learning and causal effect estimation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the random seed");
  app.add_option("--out", g.out, "Output path (file or directory, per subcommand)");
  app.add_option("--threads", g.threads, "Worker threads for bench (0 = all cores)");
  app.add_flag("--quiet", g.quiet, "Suppress progress and summary output");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Synthesise a dataset to CSV");
  gen_cmd->add_option("--config", gen.config, "Synthetic-data config JSON");
  gen_cmd->add_option("--setting", gen.setting, "A or B");
  gen_cmd->add_option("--n", gen.n, "Rows");
  gen_cmd->add_option("--d-zfd", gen.d_zfd, "Front-door dimensionality");
  gen_cmd->add_option("--d-x", gen.d_x, "Proxy dimensionality");
  gen_cmd->add_option("--u-scale", gen.u_scale, "Hidden confounder strength");
  gen_cmd->add_option("--y-kind", gen.y_kind, "continuous or binary");
  gen_cmd->add_option("--x-kind", gen.x_kind, "continuous or binary");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Fit the model on a dataset CSV");
  train_cmd->add_option("--data", tr.data, "Dataset CSV")->required();
  train_cmd->add_option("--config", tr.config, "Model config JSON");
  train_cmd->add_option("--epochs", tr.epochs, "Epochs");
  train_cmd->add_option("--d-psi", tr.d_psi, "Representation dimensionality");

  EstimateArgs es;
  auto* est_cmd = app.add_subcommand("estimate", "Estimate the ATE from a dataset and optional checkpoint");
  est_cmd->add_option("--data", es.data, "Dataset CSV")->required();
  est_cmd->add_option("--checkpoint", es.checkpoint, "Checkpoint JSON from train");
  est_cmd->add_flag("--quadratic", es.quadratic, "Quadratic outcome regressions");

  BenchArgs be;
  auto* bench_cmd = app.add_subcommand("bench", "Run an experiment spec");
  bench_cmd->add_option("spec", be.spec, "Experiment spec JSON")->required();

  DagArgs da;
  auto* dag_cmd = app.add_subcommand("check-dag", "Check back-door / front-door criteria on a DAG JSON");
  dag_cmd->add_option("file", da.file, "DAG JSON")->required();
  dag_cmd->add_option("--treatment", da.treatment, "Treatment node (default: role-tagged)");
  dag_cmd->add_option("--outcome", da.outcome, "Outcome node (default: role-tagged)");
  dag_cmd->add_option("--frontdoor", da.frontdoor, "Comma-separated candidate front-door set");
  dag_cmd->add_option("--backdoor", da.backdoor, "Comma-separated candidate back-door set");

  RealArgs re;
  auto* real_cmd = app.add_subcommand("eval-real", "Run the pipeline on a real dataset spec");
  real_cmd->add_option("spec", re.spec, "Real dataset spec JSON")->required();
  real_cmd->add_option("--config", re.config, "Model config JSON");
  real_cmd->add_option("--epochs", re.epochs, "Epochs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*gen_cmd) return run_gen(g, gen);
    if (*train_cmd) return run_train(g, tr);
    if (*est_cmd) return run_estimate(g, es);
    if (*bench_cmd) return run_bench(g, be);
    if (*dag_cmd) return run_check_dag(g, da);
    if (*real_cmd) return run_eval_real(g, re);
  } catch (const TrainingDivergence& e) {
    std::cerr << "error: numeric divergence in '" << e.culprit() << "': " << e.what() << '\n';
    return kDivergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
