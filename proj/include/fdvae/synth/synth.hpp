#pragma once
// Linear-Gaussian simulator for the proxy front-door problem.
//
//   W1, W2, U ~ N(0, 1)                       (optional W_Y, W_E ~ N(0, 1))
//   T    ~ Bernoulli(sigmoid(a1 W1 + a2 W2 + a3 U))
//   Z_j  = b_j T + N(0, sz^2)                 j = 1..d_zfd
//   Y    = sum_j c_j Z_j + d W2 + u_scale e U (+ w_y_coef W_Y) + N(0, sy^2)
//   X    = M [proxied latents] + N(0, sx^2)
//
// Setting A proxies {W1, W2, Z_FD}; setting B proxies {W1, W2} only. The
// first ceil(d_x / 2) proxy columns of setting A load on every Z_FD
// component with positive weights; the remaining columns each load on one
// W. Binary Y / X replace the additive noise of that node by a Bernoulli
// draw through the logistic link.
//
// Streams: Pcg64::derive(seed, "coefficients") draws b, c then M;
// Pcg64::derive(seed, "rows") draws the rows. Settings A and B with the
// same seed therefore share b, c, every latent column, T and Y.

#include <cstdint>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fdvae/dataset.hpp"

namespace fdvae::synth {

enum class Setting { A, B };
enum class VarKind { continuous, binary };

std::string_view to_string(Setting s);
Setting setting_from_string(std::string_view s);
std::string_view to_string(VarKind k);
VarKind var_kind_from_string(std::string_view s);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct CoefficientSpec {
  double a1 = 1.0;
  double a2 = 1.0;
  double a3 = 1.0;
  Range b{0.5, 1.5};
  Range c{0.25, 0.75};
  // When nonempty these replace the random draws (length must be d_zfd).
  std::vector<double> b_fixed;
  std::vector<double> c_fixed;
  double d = 1.0;
  double e = 1.0;
  double w_y_coef = 1.0;
  Range proxy_zfd{1.0, 2.0};
  Range proxy_w{0.5, 1.5};
};

struct NoiseSpec {
  double z = 0.5;
  double y = 0.5;
  double x = 0.1;
};

struct SynthConfig {
  Setting setting = Setting::A;
  std::size_t n = 10000;
  std::size_t d_zfd = 1;
  std::size_t d_x = 8;
  double u_scale = 1.0;
  std::uint64_t seed = 0;
  CoefficientSpec coef;
  NoiseSpec noise;
  bool include_w_y = false;
  bool include_w_e = false;
  VarKind y_kind = VarKind::continuous;
  VarKind x_kind = VarKind::continuous;

  // Throws InvalidArgument.
  void validate() const;
};

nlohmann::json to_json(const SynthConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
SynthConfig synth_config_from_json(const nlohmann::json& doc);

// Structural coefficients realised for one config.
struct Coefficients {
  std::vector<double> b;
  std::vector<double> c;
  num::Tensor m;  // d_x x (number of proxied latents)
};
Coefficients draw_coefficients(const SynthConfig& cfg);

Dataset generate(const SynthConfig& cfg);

// Analytic E[Y|do(T=1)] - E[Y|do(T=0)]: sum_j b_j c_j for continuous Y,
// a Gaussian-logistic integral for binary Y.
double true_ate(const SynthConfig& cfg);

struct MonteCarloAte {
  double estimate = 0.0;
  double std_error = 0.0;
};
// Interventional simulation: each arm clamps T and resamples everything
// else with its own draws.
MonteCarloAte monte_carlo_ate(const SynthConfig& cfg, std::size_t draws, std::uint64_t seed);

enum class SweepAxis { sample_size, u_scale, d_zfd };
std::string_view to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(std::string_view s);

struct SweepPoint {
  double axis_value = 0.0;
  std::size_t replication = 0;
  SynthConfig config;
};

// One config per (value, replication), values outer. Replication seeds:
//   seed = mix_seed(mix_seed(mix_seed(base.seed, tag_hash(axis)), bits(value)), replication)
// where bits() is the IEEE-754 bit pattern of the value as a double.
std::vector<SweepPoint> sweep_configs(const SynthConfig& base, SweepAxis axis, const std::vector<double>& values,
                                      std::size_t replications);
std::uint64_t sweep_seed(std::uint64_t base_seed, SweepAxis axis, double value, std::size_t replication);

}  // namespace fdvae::synth
