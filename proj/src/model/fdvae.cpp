#include "fdvae/model/fdvae.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "fdvae/numerics/adam.hpp"
#include "fdvae/numerics/checkpoint.hpp"
#include "fdvae/numerics/distributions.hpp"
#include "fdvae/numerics/ops.hpp"

namespace fdvae::model {

using nlohmann::json;
using num::Tape;
using num::Tensor;
using num::Var;

void FdvaeConfig::validate() const {
  if (d_psi == 0) throw InvalidArgument("fdvae config: d_psi must be >= 1");
  if (epochs == 0) throw InvalidArgument("fdvae config: epochs must be >= 1");
  if (batch_size == 0) throw InvalidArgument("fdvae config: batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("fdvae config: learning_rate must be a positive finite number");
  }
  if (!(kl_weight >= 0.0) || !std::isfinite(kl_weight)) {
    throw InvalidArgument("fdvae config: kl_weight must be a nonnegative finite number");
  }
  for (std::size_t w : hidden_widths) {
    if (w == 0) throw InvalidArgument("fdvae config: hidden widths must be >= 1");
  }
  if (early_stop && *early_stop == 0) throw InvalidArgument("fdvae config: early_stop patience must be >= 1");
  if (restarts == 0) throw InvalidArgument("fdvae config: restarts must be >= 1");
  if (restarts > 1 && (restart_epochs == 0 || restart_epochs > epochs)) {
    throw InvalidArgument("fdvae config: restart_epochs must lie in [1, epochs] when restarts > 1");
  }
}

std::uint64_t restart_seed(std::uint64_t seed, std::size_t k) {
  return k == 0 ? seed : num::mix_seed(seed, num::tag_hash("restart") + k);
}

json to_json(const FdvaeConfig& c) {
  json j;
  j["d_psi"] = c.d_psi;
  j["hidden_widths"] = c.hidden_widths;
  j["activation"] = std::string(num::to_string(c.activation));
  j["x_kind"] = std::string(synth::to_string(c.x_kind));
  j["y_kind"] = std::string(synth::to_string(c.y_kind));
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["kl_weight"] = c.kl_weight;
  j["kl_anneal_epochs"] = c.kl_anneal_epochs;
  j["early_stop"] = c.early_stop ? json(*c.early_stop) : json(nullptr);
  j["add_aux_log_likelihoods"] = c.add_aux_log_likelihoods;
  j["restarts"] = c.restarts;
  j["restart_epochs"] = c.restart_epochs;
  return j;
}

FdvaeConfig fdvae_config_from_json(const json& j) {
  static const std::set<std::string> known{"d_psi",      "hidden_widths", "activation", "x_kind",
                                           "y_kind",     "learning_rate", "epochs",     "batch_size",
                                           "seed",       "kl_weight",     "kl_anneal_epochs",
                                           "early_stop", "add_aux_log_likelihoods", "restarts",
                                           "restart_epochs"};
  if (!j.is_object()) throw DataError("fdvae config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw DataError("fdvae config: unknown key '" + key + "'");
  }
  FdvaeConfig c;
  try {
    if (j.contains("d_psi")) c.d_psi = j["d_psi"].get<std::size_t>();
    if (j.contains("hidden_widths")) c.hidden_widths = j["hidden_widths"].get<std::vector<std::size_t>>();
    if (j.contains("activation")) c.activation = num::activation_from_string(j["activation"].get<std::string>());
    if (j.contains("x_kind")) c.x_kind = synth::var_kind_from_string(j["x_kind"].get<std::string>());
    if (j.contains("y_kind")) c.y_kind = synth::var_kind_from_string(j["y_kind"].get<std::string>());
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("kl_weight")) c.kl_weight = j["kl_weight"].get<double>();
    if (j.contains("kl_anneal_epochs")) c.kl_anneal_epochs = j["kl_anneal_epochs"].get<std::size_t>();
    if (j.contains("early_stop") && !j["early_stop"].is_null()) c.early_stop = j["early_stop"].get<std::size_t>();
    if (j.contains("add_aux_log_likelihoods")) c.add_aux_log_likelihoods = j["add_aux_log_likelihoods"].get<bool>();
    if (j.contains("restarts")) c.restarts = j["restarts"].get<std::size_t>();
    if (j.contains("restart_epochs")) c.restart_epochs = j["restart_epochs"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("fdvae config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("fdvae config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(e.what());
  }
  return c;
}

FdvaeModel init(const FdvaeConfig& config, std::size_t d_x) {
  config.validate();
  if (d_x == 0) throw InvalidArgument("fdvae init: d_x must be >= 1");
  FdvaeModel m;
  m.config = config;
  m.d_x = d_x;
  num::Pcg64 rng = num::Pcg64::derive(config.seed, "init");
  const auto& hw = config.hidden_widths;
  const auto act = config.activation;
  const std::size_t d = config.d_psi;
  const bool x_cont = config.x_kind == VarKind::continuous;
  const bool y_cont = config.y_kind == VarKind::continuous;
  m.encoder = num::MlpParams::create(m.params, "encoder", d_x + 1, hw, 2 * d, act, rng);
  m.prior = num::MlpParams::create(m.params, "prior", d_x, hw, 2 * d, act, rng);
  m.decoder_x = num::MlpParams::create(m.params, "decoder_x", d, hw, x_cont ? 2 * d_x : d_x, act, rng);
  m.decoder_y = num::MlpParams::create(m.params, "decoder_y", d, hw, y_cont ? 2 : 1, act, rng);
  m.aux_t = num::MlpParams::create(m.params, "aux_t", d_x, hw, 1, act, rng);
  m.aux_y = num::MlpParams::create(m.params, "aux_y", d_x, hw, y_cont ? 2 : 1, act, rng);
  return m;
}

namespace {

struct Head {
  Var mu;
  Var log_var;  // invalid for logit heads
};

Head gaussian_head(Var out, std::size_t d) {
  return {num::slice_cols(out, 0, d), num::clamp(num::slice_cols(out, d, d), kLogVarMin, kLogVarMax)};
}

void require_width(const Tensor& x, std::size_t want, const char* what) {
  if (x.cols() != want) {
    throw InvalidArgument(std::string(what) + ": expected width " + std::to_string(want) + ", got " + x.shape_string());
  }
}

Tensor y_column(std::span<const double> y, std::size_t rows, const char* what) {
  if (y.size() != rows) {
    throw InvalidArgument(std::string(what) + ": y has " + std::to_string(y.size()) + " entries for " +
                          std::to_string(rows) + " rows");
  }
  return Tensor::column(y);
}

Var log_likelihood(Var target, Var out, VarKind kind, std::size_t d) {
  if (kind == VarKind::binary) return num::sum_cols(num::bernoulli_log_density(target, out));
  const Head h = gaussian_head(out, d);
  return num::sum_cols(num::gaussian_log_density(target, h.mu, h.log_var));
}

GaussianParams head_values(Var out, VarKind kind, std::size_t d) {
  if (kind == VarKind::binary) return {out.value(), Tensor()};
  const Head h = gaussian_head(out, d);
  return {h.mu.value(), h.log_var.value()};
}

struct LossGraph {
  Var total;
  LossTerms terms;
};

void check_term(double v, const char* name) {
  if (!std::isfinite(v)) throw TrainingDivergence(std::string("fdvae: non-finite loss term '") + name + "'", name);
}

LossGraph build_loss(const FdvaeModel& m, num::ParameterBinding& bind, const Batch& b, const Tensor& eps,
                     const LossOptions& opts) {
  const std::size_t n = b.x.rows();
  const std::size_t d = m.config.d_psi;
  if (n == 0) throw InvalidArgument("fdvae loss: empty batch");
  require_width(b.x, m.d_x, "fdvae loss");
  if (b.t.rows() != n || b.y.rows() != n || b.t.cols() != 1 || b.y.cols() != 1) {
    throw InvalidArgument("fdvae loss: t and y must be n x 1 columns matching x");
  }
  if (eps.rows() != n || eps.cols() != d) {
    throw InvalidArgument("fdvae loss: eps must be " + num::shape_string(n, d) + ", got " + eps.shape_string());
  }
  Tape& tape = bind.tape();
  const Var x = tape.constant(b.x);
  const Var t = tape.constant(b.t);
  const Var y = tape.constant(b.y);

  const Head p = gaussian_head(m.prior.forward(bind, x), d);
  Head q = p;
  if (!opts.posterior_equals_prior) {
    const Var xy[2] = {x, y};
    q = gaussian_head(m.encoder.forward(bind, num::concat_cols(xy)), d);
  }
  const Var psi = num::reparameterize(q.mu, q.log_var, eps);

  const Var rec_x = num::mean(log_likelihood(x, m.decoder_x.forward(bind, psi), m.config.x_kind, m.d_x));
  const Var rec_y = num::mean(log_likelihood(y, m.decoder_y.forward(bind, psi), m.config.y_kind, 1));
  const Var kl = num::mean(num::sum_cols(num::kl_diag_gaussians(q.mu, q.log_var, p.mu, p.log_var)));

  LossGraph g;
  g.terms.rec_x = rec_x.value()[0];
  g.terms.rec_y = rec_y.value()[0];
  g.terms.kl = kl.value()[0];
  check_term(g.terms.rec_x, "rec_x");
  check_term(g.terms.rec_y, "rec_y");
  check_term(g.terms.kl, "kl");

  Var total = num::sub(num::scale(kl, opts.kl_weight), num::add(rec_x, rec_y));
  if (opts.include_aux) {
    const double sign = opts.add_aux_log_likelihoods ? 1.0 : -1.0;
    const Var aux_t = num::scale(num::mean(log_likelihood(t, m.aux_t.forward(bind, x), VarKind::binary, 1)), sign);
    const Var aux_y = num::scale(num::mean(log_likelihood(y, m.aux_y.forward(bind, x), m.config.y_kind, 1)), sign);
    g.terms.aux_t = aux_t.value()[0];
    g.terms.aux_y = aux_y.value()[0];
    check_term(g.terms.aux_t, "aux_t");
    check_term(g.terms.aux_y, "aux_y");
    total = num::add(total, num::add(aux_t, aux_y));
  }
  g.terms.total = total.value()[0];
  check_term(g.terms.total, "total");
  g.total = total;
  return g;
}

// Runs a network on constant inputs.
template <typename F>
auto run_frozen(const FdvaeModel& m, F&& body) {
  Tape tape;
  num::ParameterBinding bind(tape, m.params, false);
  return body(tape, bind);
}

void add_scaled(LossTerms& acc, const LossTerms& l, double w) {
  acc.rec_x += w * l.rec_x;
  acc.rec_y += w * l.rec_y;
  acc.kl += w * l.kl;
  acc.aux_t += w * l.aux_t;
  acc.aux_y += w * l.aux_y;
  acc.total += w * l.total;
}

Tensor normal_tensor(std::size_t r, std::size_t c, num::Pcg64& rng) {
  Tensor out(r, c);
  for (double& v : out.values()) v = rng.normal();
  return out;
}

void check_training_data(const Tensor& x, std::span<const double> t, std::span<const double> y,
                         const FdvaeConfig& cfg) {
  const std::size_t n = x.rows();
  if (t.size() != n || y.size() != n) throw InvalidArgument("fdvae train: x, t and y row counts disagree");
  if (n < 2 * cfg.batch_size) {
    throw InvalidArgument("fdvae train: need at least 2 * batch_size = " + std::to_string(2 * cfg.batch_size) +
                          " rows, got " + std::to_string(n));
  }
  if (!x.all_finite()) throw InvalidArgument("fdvae train: non-finite entry in x");
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] != 0.0 && t[i] != 1.0) throw InvalidArgument("fdvae train: treatment at row " + std::to_string(i) + " is not 0/1");
    if (!std::isfinite(y[i])) throw InvalidArgument("fdvae train: non-finite outcome at row " + std::to_string(i));
    if (cfg.y_kind == VarKind::binary && y[i] != 0.0 && y[i] != 1.0) {
      throw InvalidArgument("fdvae train: binary outcome at row " + std::to_string(i) + " is not 0/1");
    }
  }
  if (cfg.x_kind == VarKind::binary) {
    for (double v : x.values()) {
      if (v != 0.0 && v != 1.0) throw InvalidArgument("fdvae train: binary proxies must be 0/1");
    }
  }
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

GaussianParams encode(const FdvaeModel& m, const Tensor& x, std::span<const double> y) {
  require_width(x, m.d_x, "encode");
  const Tensor yc = y_column(y, x.rows(), "encode");
  return run_frozen(m, [&](Tape& tape, num::ParameterBinding& bind) {
    const Var xy[2] = {tape.constant(x), tape.constant(yc)};
    const Head h = gaussian_head(m.encoder.forward(bind, num::concat_cols(xy)), m.config.d_psi);
    return GaussianParams{h.mu.value(), h.log_var.value()};
  });
}

GaussianParams prior(const FdvaeModel& m, const Tensor& x) {
  require_width(x, m.d_x, "prior");
  return run_frozen(m, [&](Tape& tape, num::ParameterBinding& bind) {
    const Head h = gaussian_head(m.prior.forward(bind, tape.constant(x)), m.config.d_psi);
    return GaussianParams{h.mu.value(), h.log_var.value()};
  });
}

GaussianParams decode_x(const FdvaeModel& m, const Tensor& psi) {
  require_width(psi, m.config.d_psi, "decode_x");
  return run_frozen(m, [&](Tape& tape, num::ParameterBinding& bind) {
    return head_values(m.decoder_x.forward(bind, tape.constant(psi)), m.config.x_kind, m.d_x);
  });
}

GaussianParams decode_y(const FdvaeModel& m, const Tensor& psi) {
  require_width(psi, m.config.d_psi, "decode_y");
  return run_frozen(m, [&](Tape& tape, num::ParameterBinding& bind) {
    return head_values(m.decoder_y.forward(bind, tape.constant(psi)), m.config.y_kind, 1);
  });
}

Batch make_batch(const Tensor& x, std::span<const double> t, std::span<const double> y) {
  if (t.size() != x.rows() || y.size() != x.rows()) throw InvalidArgument("make_batch: row counts disagree");
  return {x, Tensor::column(t), Tensor::column(y)};
}

json to_json(const LossTerms& l) {
  return {{"rec_x", l.rec_x}, {"rec_y", l.rec_y}, {"kl", l.kl}, {"aux_t", l.aux_t}, {"aux_y", l.aux_y}, {"total", l.total}};
}

LossTerms evaluate_loss(const FdvaeModel& m, const Batch& b, const Tensor& eps, const LossOptions& opts) {
  return run_frozen(m, [&](Tape&, num::ParameterBinding& bind) { return build_loss(m, bind, b, eps, opts).terms; });
}

LossAndGradients loss_gradients(const FdvaeModel& m, const Batch& b, const Tensor& eps, const LossOptions& opts) {
  Tape tape;
  num::ParameterBinding bind(tape, m.params, true);
  const LossGraph g = build_loss(m, bind, b, eps, opts);
  tape.backward(g.total);
  return {g.terms, bind.gradients()};
}

namespace {

struct Candidate {
  FdvaeModel model;
  num::AdamState adam;
  num::Pcg64 shuffle;
  num::Pcg64 noise;
  std::vector<std::size_t> rows;
};

class Trainer {
 public:
  Trainer(const Tensor& x, std::span<const double> t, std::span<const double> y, const FdvaeConfig& cfg,
          const TrainOptions& opts)
      : cfg_(cfg), opts_(opts), all_(make_batch(x, t, y)) {
    const std::size_t n = x.rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    train_rows_ = order;
    if (cfg.early_stop) {
      num::Pcg64 split = num::Pcg64::derive(cfg.seed, "validation");
      for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[split.below(i + 1)]);
      const auto n_val = static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, n / 10));
      std::vector<std::size_t> val_rows(order.begin(), order.begin() + n_val);
      train_rows_.assign(order.begin() + n_val, order.end());
      std::sort(val_rows.begin(), val_rows.end());
      std::sort(train_rows_.begin(), train_rows_.end());
      val_ = rows(val_rows);
    }
  }

  Candidate candidate(std::size_t k) const {
    FdvaeConfig c = cfg_;
    c.seed = restart_seed(cfg_.seed, k);
    Candidate cand{init(c, all_.x.cols()), {}, num::Pcg64::derive(c.seed, "shuffle"),
                   num::Pcg64::derive(c.seed, "noise"), train_rows_};
    cand.model.config = cfg_;
    cand.adam = num::AdamState(cand.model.params, num::AdamOptions{.learning_rate = cfg_.learning_rate});
    return cand;
  }

  EpochRecord run_epoch(Candidate& c, std::size_t epoch, std::size_t restart) const {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const double kl_w = cfg_.kl_anneal_epochs == 0
                            ? cfg_.kl_weight
                            : cfg_.kl_weight * std::min(1.0, static_cast<double>(epoch + 1) /
                                                                 static_cast<double>(cfg_.kl_anneal_epochs));
    const LossOptions lo{.kl_weight = kl_w, .include_aux = true, .add_aux_log_likelihoods = cfg_.add_aux_log_likelihoods};
    auto& r = c.rows;
    for (std::size_t i = r.size() - 1; i > 0; --i) std::swap(r[i], r[c.shuffle.below(i + 1)]);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t begin = 0; begin < r.size(); begin += cfg_.batch_size) {
      const std::size_t end = std::min(r.size(), begin + cfg_.batch_size);
      const Batch b = rows(std::span<const std::size_t>(r.data() + begin, end - begin));
      const Tensor eps = normal_tensor(end - begin, cfg_.d_psi, c.noise);
      const LossAndGradients lg = loss_gradients(c.model, b, eps, lo);
      num::adam_step(c.model.params, lg.gradients, c.adam);
      add_scaled(rec.train, lg.terms, static_cast<double>(end - begin) / static_cast<double>(r.size()));
    }
    if (!c.model.params.all_finite()) throw TrainingDivergence("fdvae: non-finite parameter after update", "parameters");
    if (val_) rec.validation = fixed_noise_loss(c.model, *val_, "validation-noise");
    rec.seconds = std::chrono::duration<double>(clock::now() - start).count();
    if (opts_.log) {
      json line{{"epoch", epoch}, {"restart", restart}, {"kl_weight", kl_w}, {"train", to_json(rec.train)},
                {"seconds", rec.seconds}, {"timestamp", iso_timestamp()}};
      if (rec.validation) line["validation"] = to_json(*rec.validation);
      *opts_.log << line.dump() << '\n';
    }
    return rec;
  }

  double selection_loss(const Candidate& c) const {
    return fixed_noise_loss(c.model, rows(train_rows_), "selection").total;
  }

 private:
  Batch rows(std::span<const std::size_t> idx) const {
    return {all_.x.select_rows(idx), all_.t.select_rows(idx), all_.y.select_rows(idx)};
  }

  LossTerms fixed_noise_loss(const FdvaeModel& m, const Batch& b, const char* tag) const {
    num::Pcg64 rng = num::Pcg64::derive(cfg_.seed, tag);
    const Tensor eps = normal_tensor(b.x.rows(), cfg_.d_psi, rng);
    return evaluate_loss(m, b, eps, {.kl_weight = cfg_.kl_weight, .add_aux_log_likelihoods = cfg_.add_aux_log_likelihoods});
  }

  const FdvaeConfig& cfg_;
  const TrainOptions& opts_;
  Batch all_;
  std::vector<std::size_t> train_rows_;
  std::optional<Batch> val_;
};

}  // namespace

TrainResult train(const Tensor& x, std::span<const double> t, std::span<const double> y, const FdvaeConfig& config,
                  const TrainOptions& opts) {
  config.validate();
  check_training_data(x, t, y, config);
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const Trainer trainer(x, t, y, config, opts);
  TrainReport report;
  std::optional<Candidate> chosen;
  std::size_t first_epoch = 0;

  try {
    if (config.restarts > 1) {
      double best = std::numeric_limits<double>::infinity();
      std::vector<EpochRecord> best_records;
      for (std::size_t k = 0; k < config.restarts; ++k) {
        Candidate c = trainer.candidate(k);
        std::vector<EpochRecord> records;
        for (std::size_t e = 0; e < config.restart_epochs; ++e) records.push_back(trainer.run_epoch(c, e, k));
        const double loss = trainer.selection_loss(c);
        report.restart_losses.push_back(loss);
        if (loss < best) {
          best = loss;
          report.chosen_restart = k;
          best_records = std::move(records);
          chosen = std::move(c);
        }
      }
      if (!chosen) throw TrainingDivergence("fdvae: every restart has a non-finite selection loss", "total");
      report.epochs = std::move(best_records);
      first_epoch = config.restart_epochs;
    } else {
      chosen = trainer.candidate(0);
    }

    std::optional<num::ParameterSet> best_params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    for (std::size_t epoch = first_epoch; epoch < config.epochs; ++epoch) {
      report.epochs.push_back(trainer.run_epoch(*chosen, epoch, report.chosen_restart));
      const EpochRecord& rec = report.epochs.back();
      if (!config.early_stop) continue;
      if (rec.validation->total < best_val) {
        best_val = rec.validation->total;
        best_params = chosen->model.params;
        report.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= *config.early_stop) {
        break;
      }
    }
    if (best_params) chosen->model.params = std::move(*best_params);
  } catch (const TrainingDivergence& e) {
    if (!report.epochs.empty()) report.final_epoch = report.epochs.back().epoch;
    report.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
    throw FdvaeDivergence(e, std::move(report));
  }
  report.final_epoch = report.epochs.back().epoch;
  report.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return {std::move(chosen->model), std::move(report)};
}

TrainResult train(const Dataset& data, const FdvaeConfig& config, const TrainOptions& opts) {
  return train(data.x, data.t, data.y, config, opts);
}

Tensor infer_psi(const FdvaeModel& m, const Tensor& x, std::span<const double> y, num::Pcg64* sample_rng) {
  GaussianParams q = encode(m, x, y);
  if (sample_rng) {
    for (std::size_t i = 0; i < q.mu.size(); ++i) q.mu[i] += std::exp(0.5 * q.log_var[i]) * sample_rng->normal();
  }
  return q.mu;
}

Tensor infer_psi(const FdvaeModel& m, const Dataset& data) { return infer_psi(m, data.x, data.y); }

AuxPrediction predict_aux(const FdvaeModel& m, const Tensor& x) {
  require_width(x, m.d_x, "predict_aux");
  return run_frozen(m, [&](Tape& tape, num::ParameterBinding& bind) {
    const Var xv = tape.constant(x);
    const Tensor t_logit = m.aux_t.forward(bind, xv).value();
    const Tensor y_out = m.aux_y.forward(bind, xv).value();
    AuxPrediction p;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      p.t_prob.push_back(num::sigmoid(t_logit(i, 0)));
      if (m.config.y_kind == VarKind::binary) {
        p.y_estimate.push_back(num::sigmoid(y_out(i, 0)));
      } else {
        p.y_estimate.push_back(y_out(i, 0));
        p.y_log_var.push_back(std::clamp(y_out(i, 1), kLogVarMin, kLogVarMax));
      }
    }
    return p;
  });
}

json checkpoint_json(const FdvaeModel& m) {
  return num::parameters_to_json(m.params, {{"model", "fdvae"}, {"d_x", m.d_x}, {"config", to_json(m.config)}});
}

FdvaeModel model_from_checkpoint(const json& doc) {
  FdvaeModel m;
  try {
    const json& meta = doc.at("metadata");
    if (meta.at("model").get<std::string>() != "fdvae") throw DataError("checkpoint: not an fdvae model");
    m = init(fdvae_config_from_json(meta.at("config")), meta.at("d_x").get<std::size_t>());
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  num::parameters_from_json(doc, m.params);
  return m;
}

void save_checkpoint(const FdvaeModel& m, const std::filesystem::path& path) {
  num::write_json_file(path, checkpoint_json(m));
}

FdvaeModel load_checkpoint(const std::filesystem::path& path) { return model_from_checkpoint(num::read_json_file(path)); }

}  // namespace fdvae::model
