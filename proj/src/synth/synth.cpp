#include "fdvae/synth/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <string>

#include "fdvae/error.hpp"
#include "fdvae/numerics/distributions.hpp"
#include "fdvae/numerics/rng.hpp"

namespace fdvae::synth {

using num::Pcg64;
using num::Tensor;

std::string_view to_string(Setting s) { return s == Setting::A ? "A" : "B"; }

Setting setting_from_string(std::string_view s) {
  if (s == "A" || s == "a") return Setting::A;
  if (s == "B" || s == "b") return Setting::B;
  throw InvalidArgument("unknown setting '" + std::string(s) + "' (expected A or B)");
}

std::string_view to_string(VarKind k) { return k == VarKind::continuous ? "continuous" : "binary"; }

VarKind var_kind_from_string(std::string_view s) {
  if (s == "continuous") return VarKind::continuous;
  if (s == "binary") return VarKind::binary;
  throw InvalidArgument("unknown variable kind '" + std::string(s) + "' (expected continuous or binary)");
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::sample_size: return "sample_size";
    case SweepAxis::u_scale: return "u_scale";
    case SweepAxis::d_zfd: return "d_zfd";
  }
  return "sample_size";
}

SweepAxis sweep_axis_from_string(std::string_view s) {
  if (s == "sample_size" || s == "n") return SweepAxis::sample_size;
  if (s == "u_scale") return SweepAxis::u_scale;
  if (s == "d_zfd") return SweepAxis::d_zfd;
  throw InvalidArgument("unknown sweep axis '" + std::string(s) + "'");
}

namespace {

void check_range(const Range& r, const char* what) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw InvalidArgument(std::string("synth config: invalid range for ") + what);
  }
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string("synth config: ") + what + " must be finite");
}

std::size_t w_count(const SynthConfig& cfg) { return 2 + cfg.include_w_y + cfg.include_w_e; }

std::size_t latent_count(const SynthConfig& cfg) {
  return w_count(cfg) + (cfg.setting == Setting::A ? cfg.d_zfd : 0);
}

}  // namespace

void SynthConfig::validate() const {
  if (n < 1) throw InvalidArgument("synth config: n must be at least 1");
  if (d_zfd < 1) throw InvalidArgument("synth config: d_zfd must be at least 1");
  if (d_x < 1) throw InvalidArgument("synth config: d_x must be at least 1");
  if (!(u_scale >= 0.0) || !std::isfinite(u_scale)) throw InvalidArgument("synth config: u_scale must be >= 0");
  if (!(noise.z > 0.0) || !(noise.y > 0.0) || !(noise.x > 0.0) || !std::isfinite(noise.z) ||
      !std::isfinite(noise.y) || !std::isfinite(noise.x)) {
    throw InvalidArgument("synth config: noise standard deviations must be positive");
  }
  check_range(coef.b, "b");
  check_range(coef.c, "c");
  check_range(coef.proxy_zfd, "proxy_zfd");
  check_range(coef.proxy_w, "proxy_w");
  for (double v : {coef.a1, coef.a2, coef.a3, coef.d, coef.e, coef.w_y_coef}) check_finite(v, "coefficients");
  if (!coef.b_fixed.empty() && coef.b_fixed.size() != d_zfd) {
    throw InvalidArgument("synth config: b_fixed needs d_zfd entries");
  }
  if (!coef.c_fixed.empty() && coef.c_fixed.size() != d_zfd) {
    throw InvalidArgument("synth config: c_fixed needs d_zfd entries");
  }
  for (double v : coef.b_fixed) check_finite(v, "b_fixed");
  for (double v : coef.c_fixed) check_finite(v, "c_fixed");
}

nlohmann::json to_json(const SynthConfig& cfg) {
  const auto& k = cfg.coef;
  nlohmann::json coef{{"a1", k.a1}, {"a2", k.a2}, {"a3", k.a3},
                      {"b", {k.b.lo, k.b.hi}}, {"c", {k.c.lo, k.c.hi}},
                      {"d", k.d}, {"e", k.e}, {"w_y_coef", k.w_y_coef},
                      {"proxy_zfd", {k.proxy_zfd.lo, k.proxy_zfd.hi}}, {"proxy_w", {k.proxy_w.lo, k.proxy_w.hi}}};
  if (!k.b_fixed.empty()) coef["b_fixed"] = k.b_fixed;
  if (!k.c_fixed.empty()) coef["c_fixed"] = k.c_fixed;
  return {{"setting", std::string(to_string(cfg.setting))},
          {"n", cfg.n},
          {"d_zfd", cfg.d_zfd},
          {"d_x", cfg.d_x},
          {"u_scale", cfg.u_scale},
          {"seed", cfg.seed},
          {"coefficients", coef},
          {"noise", {{"z", cfg.noise.z}, {"y", cfg.noise.y}, {"x", cfg.noise.x}}},
          {"include_w_y", cfg.include_w_y},
          {"include_w_e", cfg.include_w_e},
          {"y_kind", std::string(to_string(cfg.y_kind))},
          {"x_kind", std::string(to_string(cfg.x_kind))}};
}

namespace {

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& known, const char* where) {
  if (!obj.is_object()) throw DataError(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.count(key)) throw DataError(std::string(where) + ": unknown key '" + key + "'");
  }
}

Range range_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw DataError("ranges are [lo, hi] pairs");
  return {v[0], v[1]};
}

}  // namespace

SynthConfig synth_config_from_json(const nlohmann::json& doc) {
  SynthConfig cfg;
  try {
    reject_unknown(doc,
                   {"setting", "n", "d_zfd", "d_x", "u_scale", "seed", "coefficients", "noise", "include_w_y",
                    "include_w_e", "y_kind", "x_kind"},
                   "synth config");
    if (doc.contains("setting")) cfg.setting = setting_from_string(doc["setting"].get<std::string>());
    if (doc.contains("n")) cfg.n = doc["n"].get<std::size_t>();
    if (doc.contains("d_zfd")) cfg.d_zfd = doc["d_zfd"].get<std::size_t>();
    if (doc.contains("d_x")) cfg.d_x = doc["d_x"].get<std::size_t>();
    if (doc.contains("u_scale")) cfg.u_scale = doc["u_scale"].get<double>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("include_w_y")) cfg.include_w_y = doc["include_w_y"].get<bool>();
    if (doc.contains("include_w_e")) cfg.include_w_e = doc["include_w_e"].get<bool>();
    if (doc.contains("y_kind")) cfg.y_kind = var_kind_from_string(doc["y_kind"].get<std::string>());
    if (doc.contains("x_kind")) cfg.x_kind = var_kind_from_string(doc["x_kind"].get<std::string>());
    if (doc.contains("noise")) {
      const auto& nz = doc["noise"];
      reject_unknown(nz, {"z", "y", "x"}, "noise");
      if (nz.contains("z")) cfg.noise.z = nz["z"].get<double>();
      if (nz.contains("y")) cfg.noise.y = nz["y"].get<double>();
      if (nz.contains("x")) cfg.noise.x = nz["x"].get<double>();
    }
    if (doc.contains("coefficients")) {
      const auto& c = doc["coefficients"];
      reject_unknown(c,
                     {"a1", "a2", "a3", "b", "c", "b_fixed", "c_fixed", "d", "e", "w_y_coef", "proxy_zfd", "proxy_w"},
                     "coefficients");
      auto& k = cfg.coef;
      if (c.contains("a1")) k.a1 = c["a1"].get<double>();
      if (c.contains("a2")) k.a2 = c["a2"].get<double>();
      if (c.contains("a3")) k.a3 = c["a3"].get<double>();
      if (c.contains("d")) k.d = c["d"].get<double>();
      if (c.contains("e")) k.e = c["e"].get<double>();
      if (c.contains("w_y_coef")) k.w_y_coef = c["w_y_coef"].get<double>();
      if (c.contains("b")) k.b = range_from(c["b"]);
      if (c.contains("c")) k.c = range_from(c["c"]);
      if (c.contains("proxy_zfd")) k.proxy_zfd = range_from(c["proxy_zfd"]);
      if (c.contains("proxy_w")) k.proxy_w = range_from(c["proxy_w"]);
      if (c.contains("b_fixed")) k.b_fixed = c["b_fixed"].get<std::vector<double>>();
      if (c.contains("c_fixed")) k.c_fixed = c["c_fixed"].get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Coefficients draw_coefficients(const SynthConfig& cfg) {
  cfg.validate();
  Pcg64 rng = Pcg64::derive(cfg.seed, "coefficients");
  Coefficients out;
  for (std::size_t j = 0; j < cfg.d_zfd; ++j) out.b.push_back(rng.uniform(cfg.coef.b.lo, cfg.coef.b.hi));
  for (std::size_t j = 0; j < cfg.d_zfd; ++j) out.c.push_back(rng.uniform(cfg.coef.c.lo, cfg.coef.c.hi));
  if (!cfg.coef.b_fixed.empty()) out.b = cfg.coef.b_fixed;
  if (!cfg.coef.c_fixed.empty()) out.c = cfg.coef.c_fixed;

  // Latent order: W1, W2, [W_Y], [W_E], then Z_FD components (setting A).
  const std::size_t nw = w_count(cfg);
  out.m = Tensor(cfg.d_x, latent_count(cfg));
  const std::size_t z_rows = cfg.setting == Setting::A ? (cfg.d_x + 1) / 2 : 0;
  for (std::size_t r = 0; r < z_rows; ++r) {
    for (std::size_t j = 0; j < cfg.d_zfd; ++j) out.m(r, nw + j) = rng.uniform(cfg.coef.proxy_zfd.lo, cfg.coef.proxy_zfd.hi);
  }
  const std::size_t w_rows = cfg.d_x - z_rows;
  for (std::size_t r = 0; r < w_rows; ++r) {
    const std::size_t group = r * nw / w_rows;
    out.m(z_rows + r, group) = rng.uniform(cfg.coef.proxy_w.lo, cfg.coef.proxy_w.hi);
  }
  return out;
}

Dataset generate(const SynthConfig& cfg) {
  const Coefficients k = draw_coefficients(cfg);
  Pcg64 rng = Pcg64::derive(cfg.seed, "rows");
  const std::size_t n = cfg.n, dz = cfg.d_zfd, nw = w_count(cfg);
  const auto& cf = cfg.coef;

  Dataset ds;
  ds.x = Tensor(n, cfg.d_x);
  ds.t.resize(n);
  ds.y.resize(n);
  HiddenColumns h;
  h.z_fd = Tensor(n, dz);
  h.u.resize(n);
  h.w1.resize(n);
  h.w2.resize(n);
  if (cfg.include_w_y) h.w_y.resize(n);
  if (cfg.include_w_e) h.w_e.resize(n);

  std::vector<double> latent(latent_count(cfg));
  for (std::size_t i = 0; i < n; ++i) {
    const double w1 = rng.normal(), w2 = rng.normal(), u = rng.normal();
    const double wy = cfg.include_w_y ? rng.normal() : 0.0;
    const double we = cfg.include_w_e ? rng.normal() : 0.0;
    const double t = rng.uniform() < num::sigmoid(cf.a1 * w1 + cf.a2 * w2 + cf.a3 * u) ? 1.0 : 0.0;
    double lin = cf.d * w2 + cfg.u_scale * cf.e * u + (cfg.include_w_y ? cf.w_y_coef * wy : 0.0);
    for (std::size_t j = 0; j < dz; ++j) {
      const double z = k.b[j] * t + cfg.noise.z * rng.normal();
      h.z_fd(i, j) = z;
      lin += k.c[j] * z;
    }
    const double y = cfg.y_kind == VarKind::continuous ? lin + cfg.noise.y * rng.normal()
                                                       : (rng.uniform() < num::sigmoid(lin) ? 1.0 : 0.0);

    std::size_t li = 0;
    latent[li++] = w1;
    latent[li++] = w2;
    if (cfg.include_w_y) latent[li++] = wy;
    if (cfg.include_w_e) latent[li++] = we;
    if (cfg.setting == Setting::A) {
      for (std::size_t j = 0; j < dz; ++j) latent[nw + j] = h.z_fd(i, j);
    }
    for (std::size_t r = 0; r < cfg.d_x; ++r) {
      double mean = 0.0;
      for (std::size_t l = 0; l < latent.size(); ++l) mean += k.m(r, l) * latent[l];
      ds.x(i, r) = cfg.x_kind == VarKind::continuous ? mean + cfg.noise.x * rng.normal()
                                                     : (rng.uniform() < num::sigmoid(mean) ? 1.0 : 0.0);
    }
    ds.t[i] = t;
    ds.y[i] = y;
    h.u[i] = u;
    h.w1[i] = w1;
    h.w2[i] = w2;
    if (cfg.include_w_y) h.w_y[i] = wy;
    if (cfg.include_w_e) h.w_e[i] = we;
  }
  ds.hidden = std::move(h);
  ds.true_ate = true_ate(cfg);
  ds.provenance = {{"source", "synth"}, {"config", to_json(cfg)}, {"coefficients", {{"b", k.b}, {"c", k.c}}}};
  return ds;
}

namespace {

// E[sigmoid(m + s N(0,1))] by composite Simpson over +-12 s.
double expected_sigmoid(double m, double s) {
  if (s == 0.0) return num::sigmoid(m);
  const int intervals = 4000;
  const double lo = -12.0, hi = 12.0, h = (hi - lo) / intervals;
  double acc = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double z = lo + i * h;
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * num::sigmoid(m + s * z) * std::exp(-0.5 * z * z);
  }
  return acc * h / 3.0 / std::sqrt(2.0 * 3.14159265358979323846);
}

}  // namespace

double true_ate(const SynthConfig& cfg) {
  const Coefficients k = draw_coefficients(cfg);
  double effect = 0.0;
  for (std::size_t j = 0; j < cfg.d_zfd; ++j) effect += k.b[j] * k.c[j];
  if (cfg.y_kind == VarKind::continuous) return effect;
  double var = cfg.coef.d * cfg.coef.d + std::pow(cfg.u_scale * cfg.coef.e, 2);
  if (cfg.include_w_y) var += cfg.coef.w_y_coef * cfg.coef.w_y_coef;
  for (std::size_t j = 0; j < cfg.d_zfd; ++j) var += std::pow(k.c[j] * cfg.noise.z, 2);
  const double s = std::sqrt(var);
  return expected_sigmoid(effect, s) - expected_sigmoid(0.0, s);
}

MonteCarloAte monte_carlo_ate(const SynthConfig& cfg, std::size_t draws, std::uint64_t seed) {
  if (draws < 2) throw InvalidArgument("monte_carlo_ate: need at least 2 draws per arm");
  const Coefficients k = draw_coefficients(cfg);
  Pcg64 rng = Pcg64::derive(seed, "do-simulation");
  const auto& cf = cfg.coef;
  double mean[2] = {0, 0}, m2[2] = {0, 0};
  for (int arm = 1; arm >= 0; --arm) {
    for (std::size_t i = 0; i < draws; ++i) {
      // Exogenous parents of Y; W1 and the treatment mechanism are cut.
      const double w2 = rng.normal(), u = rng.normal();
      double lin = cf.d * w2 + cfg.u_scale * cf.e * u;
      if (cfg.include_w_y) lin += cf.w_y_coef * rng.normal();
      for (std::size_t j = 0; j < cfg.d_zfd; ++j) lin += k.c[j] * (k.b[j] * arm + cfg.noise.z * rng.normal());
      const double y = cfg.y_kind == VarKind::continuous ? lin + cfg.noise.y * rng.normal()
                                                         : (rng.uniform() < num::sigmoid(lin) ? 1.0 : 0.0);
      // Welford update.
      const double delta = y - mean[arm];
      mean[arm] += delta / static_cast<double>(i + 1);
      m2[arm] += delta * (y - mean[arm]);
    }
  }
  const double dn = static_cast<double>(draws);
  const double v1 = m2[1] / (dn - 1.0), v0 = m2[0] / (dn - 1.0);
  return {mean[1] - mean[0], std::sqrt(v1 / dn + v0 / dn)};
}

std::uint64_t sweep_seed(std::uint64_t base_seed, SweepAxis axis, double value, std::size_t replication) {
  std::uint64_t s = num::mix_seed(base_seed, num::tag_hash(to_string(axis)));
  s = num::mix_seed(s, std::bit_cast<std::uint64_t>(value));
  return num::mix_seed(s, static_cast<std::uint64_t>(replication));
}

std::vector<SweepPoint> sweep_configs(const SynthConfig& base, SweepAxis axis, const std::vector<double>& values,
                                      std::size_t replications) {
  if (values.empty()) throw InvalidArgument("sweep_configs: no axis values");
  if (replications < 1) throw InvalidArgument("sweep_configs: replications must be at least 1");
  std::vector<SweepPoint> out;
  out.reserve(values.size() * replications);
  for (double v : values) {
    SynthConfig cfg = base;
    switch (axis) {
      case SweepAxis::sample_size:
        if (!(v >= 1.0) || v != std::floor(v)) throw InvalidArgument("sweep_configs: sample sizes must be positive integers");
        cfg.n = static_cast<std::size_t>(v);
        break;
      case SweepAxis::u_scale:
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("sweep_configs: u_scale values must be >= 0");
        cfg.u_scale = v;
        break;
      case SweepAxis::d_zfd:
        if (!(v >= 1.0) || v != std::floor(v)) throw InvalidArgument("sweep_configs: d_zfd values must be positive integers");
        cfg.d_zfd = static_cast<std::size_t>(v);
        if (!cfg.coef.b_fixed.empty() || !cfg.coef.c_fixed.empty()) {
          throw InvalidArgument("sweep_configs: fixed b/c vectors cannot be combined with a d_zfd sweep");
        }
        break;
    }
    cfg.validate();
    for (std::size_t r = 0; r < replications; ++r) {
      SweepPoint p{v, r, cfg};
      p.config.seed = sweep_seed(base.seed, axis, v, r);
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace fdvae::synth
