#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdvae/dataset.hpp"
#include "fdvae/error.hpp"
#include "fdvae/numerics/mlp.hpp"
#include "fdvae/numerics/tensor.hpp"
#include "fdvae/synth/synth.hpp"

namespace fdvae::model {

using synth::VarKind;

struct FdvaeConfig {
  std::size_t d_psi = 1;
  std::vector<std::size_t> hidden_widths{64, 64};
  num::Activation activation = num::Activation::elu;
  VarKind x_kind = VarKind::continuous;
  VarKind y_kind = VarKind::continuous;
  double learning_rate = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
  double kl_weight = 1.0;
  // Linear KL warm-up over this many epochs; 0 disables it.
  std::size_t kl_anneal_epochs = 0;
  // Patience (epochs) on the validation loss of a held-out 10% split.
  std::optional<std::size_t> early_stop;
  // Adds the auxiliary log-likelihoods to the loss instead of their negatives.
  bool add_aux_log_likelihoods = false;
  // Multi-start: this many initialisations are trained for restart_epochs
  // each; the one with the lowest training loss continues.
  std::size_t restarts = 3;
  std::size_t restart_epochs = 5;

  // Throws InvalidArgument.
  void validate() const;
};

nlohmann::json to_json(const FdvaeConfig& c);
// Unknown keys throw DataError; missing keys keep their defaults.
FdvaeConfig fdvae_config_from_json(const nlohmann::json& j);

// Every log-variance head is clamped to this range.
inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

struct FdvaeModel {
  FdvaeConfig config;
  std::size_t d_x = 0;
  num::ParameterSet params;
  num::MlpParams encoder;    // [X, Y] -> [mu, log_var] of q(psi | x, y)
  num::MlpParams prior;      // X -> [mu', log_var'] of p(psi | x)
  num::MlpParams decoder_x;  // psi -> [mu, log_var] of X, or logits of X
  num::MlpParams decoder_y;  // psi -> [mu, log_var] of Y, or one logit
  num::MlpParams aux_t;      // X -> logit of T
  num::MlpParams aux_y;      // X -> [mu, log_var] of Y, or one logit
};

// Parameters drawn from Pcg64::derive(config.seed, "init").
FdvaeModel init(const FdvaeConfig& config, std::size_t d_x);

// Seed of multi-start candidate k; candidate 0 uses the config seed itself.
std::uint64_t restart_seed(std::uint64_t seed, std::size_t k);

struct GaussianParams {
  num::Tensor mu;       // n x d
  num::Tensor log_var;  // n x d
};

GaussianParams encode(const FdvaeModel& m, const num::Tensor& x, std::span<const double> y);
GaussianParams prior(const FdvaeModel& m, const num::Tensor& x);
// Continuous kinds fill both fields; binary kinds put logits in mu and leave
// log_var empty.
GaussianParams decode_x(const FdvaeModel& m, const num::Tensor& psi);
GaussianParams decode_y(const FdvaeModel& m, const num::Tensor& psi);

struct Batch {
  num::Tensor x;  // n x d_x
  num::Tensor t;  // n x 1
  num::Tensor y;  // n x 1
};

Batch make_batch(const num::Tensor& x, std::span<const double> t, std::span<const double> y);

// Batch means of each term. total = -rec_x - rec_y + kl_weight * kl + aux_t + aux_y
// where aux_* are negative log-likelihoods (their negatives under
// add_aux_log_likelihoods).
struct LossTerms {
  double rec_x = 0.0;
  double rec_y = 0.0;
  double kl = 0.0;
  double aux_t = 0.0;
  double aux_y = 0.0;
  double total = 0.0;
};

nlohmann::json to_json(const LossTerms& l);

struct LossOptions {
  double kl_weight = 1.0;
  bool include_aux = true;
  bool add_aux_log_likelihoods = false;
  // Forces q(psi | x, y) to the prior's output (diagnostics).
  bool posterior_equals_prior = false;
};

// One reparameterised sample per row; eps is n x d_psi standard normal noise.
// Non-finite terms throw TrainingDivergence naming the term.
LossTerms evaluate_loss(const FdvaeModel& m, const Batch& b, const num::Tensor& eps, const LossOptions& opts);

struct LossAndGradients {
  LossTerms terms;
  std::vector<num::Tensor> gradients;  // aligned with m.params
};

LossAndGradients loss_gradients(const FdvaeModel& m, const Batch& b, const num::Tensor& eps, const LossOptions& opts);

struct EpochRecord {
  std::size_t epoch = 0;
  LossTerms train;
  std::optional<LossTerms> validation;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  double wall_seconds = 0.0;
  std::size_t final_epoch = 0;
  // Epoch whose parameters were kept when early stopping restored the best.
  std::optional<std::size_t> best_epoch;
  // Index of the initialisation kept by multi-start selection, and the
  // selection loss of every candidate.
  std::size_t chosen_restart = 0;
  std::vector<double> restart_losses;
};

// TrainingDivergence that also carries the report up to the failing epoch.
class FdvaeDivergence : public TrainingDivergence {
 public:
  FdvaeDivergence(const TrainingDivergence& cause, TrainReport report)
      : TrainingDivergence(cause.what(), cause.culprit()), report_(std::move(report)) {}
  const TrainReport& report() const noexcept { return report_; }

 private:
  TrainReport report_;
};

struct TrainOptions {
  // Receives one JSON line per epoch.
  std::ostream* log = nullptr;
};

struct TrainResult {
  FdvaeModel model;
  TrainReport report;
};

// Minibatch Adam; requires at least 2 * batch_size rows. Throws
// FdvaeDivergence on a non-finite term or gradient.
TrainResult train(const num::Tensor& x, std::span<const double> t, std::span<const double> y,
                  const FdvaeConfig& config, const TrainOptions& opts = {});
TrainResult train(const Dataset& data, const FdvaeConfig& config, const TrainOptions& opts = {});

// Posterior mean of q(psi | x, y), or one sample per row when rng is given.
num::Tensor infer_psi(const FdvaeModel& m, const num::Tensor& x, std::span<const double> y,
                      num::Pcg64* sample_rng = nullptr);
num::Tensor infer_psi(const FdvaeModel& m, const Dataset& data);

struct AuxPrediction {
  std::vector<double> t_prob;
  std::vector<double> y_estimate;
  std::vector<double> y_log_var;  // continuous outcomes only
};

AuxPrediction predict_aux(const FdvaeModel& m, const num::Tensor& x);

void save_checkpoint(const FdvaeModel& m, const std::filesystem::path& path);
FdvaeModel load_checkpoint(const std::filesystem::path& path);
nlohmann::json checkpoint_json(const FdvaeModel& m);
FdvaeModel model_from_checkpoint(const nlohmann::json& doc);

}  // namespace fdvae::model
