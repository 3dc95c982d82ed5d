#include "fdvae/estimators/estimators.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fdvae/error.hpp"
#include "fdvae/numerics/stats.hpp"

namespace fdvae::est {

using num::LinearFit;
using num::Tensor;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::frontdoor_plugin: return "frontdoor_plugin";
    case Method::backdoor_regression: return "backdoor_regression";
    case Method::naive_diff_means: return "naive_diff_means";
  }
  return "naive_diff_means";
}

namespace {

struct Arms {
  std::vector<std::size_t> idx[2];
};

Arms split_arms(std::span<const double> t, std::span<const double> y, std::size_t rows, const char* what) {
  if (t.size() != y.size() || t.size() != rows) {
    throw InvalidArgument(std::string(what) + ": t, y and features must have the same number of rows");
  }
  Arms a;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == 1.0) a.idx[1].push_back(i);
    else if (t[i] == 0.0) a.idx[0].push_back(i);
    else throw InvalidArgument(std::string(what) + ": treatment at row " + std::to_string(i) + " is not 0/1");
    if (!std::isfinite(y[i])) throw InvalidArgument(std::string(what) + ": non-finite outcome at row " + std::to_string(i));
  }
  for (int arm = 0; arm < 2; ++arm) {
    if (a.idx[arm].size() < 2) {
      throw DegenerateInput(std::string(what) + ": treatment arm " + std::to_string(arm) + " has " +
                            std::to_string(a.idx[arm].size()) + " rows (need at least 2)");
    }
  }
  return a;
}

Tensor expand(const Tensor& f, const RegressionOptions& opts) {
  if (!f.all_finite()) throw InvalidArgument("estimator: non-finite feature value");
  if (!opts.quadratic_features) return f;
  const std::size_t p = f.cols();
  Tensor out(f.rows(), p + p * (p + 1) / 2);
  for (std::size_t i = 0; i < f.rows(); ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < p; ++j) out(i, c++) = f(i, j);
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = j; k < p; ++k) out(i, c++) = f(i, j) * f(i, k);
  }
  return out;
}

LinearFit fit_arm(const Tensor& features, std::span<const double> y, const std::vector<std::size_t>& rows) {
  std::vector<double> target;
  target.reserve(rows.size());
  for (std::size_t i : rows) target.push_back(y[i]);
  return num::linear_regression(features.select_rows(rows), target);
}

}  // namespace

AteEstimate ate_frontdoor_plugin(const Tensor& psi, std::span<const double> t, std::span<const double> y,
                                 RegressionOptions opts) {
  const Arms arms = split_arms(t, y, psi.rows(), "ate_frontdoor_plugin");
  const Tensor f = expand(psi, opts);
  const LinearFit m1 = fit_arm(f, y, arms.idx[1]);
  const LinearFit m0 = fit_arm(f, y, arms.idx[0]);
  const double n = static_cast<double>(t.size());
  const double p1 = static_cast<double>(arms.idx[1].size()) / n;
  const double p0 = 1.0 - p1;
  double sum[2] = {0.0, 0.0};
  for (int arm = 0; arm < 2; ++arm) {
    for (std::size_t i : arms.idx[arm]) sum[arm] += m1.predict(f.row(i)) * p1 + m0.predict(f.row(i)) * p0;
  }
  AteEstimate out;
  out.method = Method::frontdoor_plugin;
  out.n_treated = arms.idx[1].size();
  out.n_control = arms.idx[0].size();
  out.value = sum[1] / static_cast<double>(out.n_treated) - sum[0] / static_cast<double>(out.n_control);
  out.ridge_fallback = m1.ridge_fallback || m0.ridge_fallback;
  return out;
}

AteEstimate ate_backdoor_regression(const Tensor& x, std::span<const double> t, std::span<const double> y,
                                    RegressionOptions opts) {
  const Arms arms = split_arms(t, y, x.rows(), "ate_backdoor_regression");
  const Tensor f = expand(x, opts);
  const LinearFit f1 = fit_arm(f, y, arms.idx[1]);
  const LinearFit f0 = fit_arm(f, y, arms.idx[0]);
  double s = 0.0;
  for (std::size_t i = 0; i < f.rows(); ++i) s += f1.predict(f.row(i)) - f0.predict(f.row(i));
  AteEstimate out;
  out.method = Method::backdoor_regression;
  out.n_treated = arms.idx[1].size();
  out.n_control = arms.idx[0].size();
  out.value = s / static_cast<double>(f.rows());
  out.ridge_fallback = f1.ridge_fallback || f0.ridge_fallback;
  return out;
}

AteEstimate naive_diff_means(std::span<const double> t, std::span<const double> y) {
  const Arms arms = split_arms(t, y, t.size(), "naive_diff_means");
  double s[2] = {0.0, 0.0};
  for (int arm = 0; arm < 2; ++arm) {
    for (std::size_t i : arms.idx[arm]) s[arm] += y[i];
  }
  AteEstimate out;
  out.method = Method::naive_diff_means;
  out.n_treated = arms.idx[1].size();
  out.n_control = arms.idx[0].size();
  out.value = s[1] / static_cast<double>(out.n_treated) - s[0] / static_cast<double>(out.n_control);
  return out;
}

double estimation_bias(double estimate, double truth) {
  if (truth == 0.0) throw DegenerateInput("estimation_bias: true effect is zero, relative bias undefined");
  if (!std::isfinite(estimate) || !std::isfinite(truth)) throw InvalidArgument("estimation_bias: non-finite input");
  return std::abs((estimate - truth) / truth) * 100.0;
}

}  // namespace fdvae::est
