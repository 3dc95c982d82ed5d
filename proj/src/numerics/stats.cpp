#include "fdvae/numerics/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdvae/error.hpp"

namespace fdvae::num {

double mean(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("mean: empty input");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double sample_std(std::span<const double> v) { return std::sqrt(sample_variance(v)); }

double pcc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("pcc: length mismatch");
  if (a.size() < 2) throw InvalidArgument("pcc: need at least two observations");
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) throw DegenerateInput("pcc: zero variance input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {
std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}
}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pcc(ra, rb);
}

double LinearFit::predict(std::span<const double> features) const {
  if (features.size() != slopes.size()) throw InvalidArgument("LinearFit::predict: feature width mismatch");
  double s = intercept;
  for (std::size_t j = 0; j < slopes.size(); ++j) s += slopes[j] * features[j];
  return s;
}

std::vector<double> LinearFit::predict(const Tensor& features) const {
  std::vector<double> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out[i] = predict(features.row(i));
  return out;
}

LinearFit linear_regression(const Tensor& features, std::span<const double> targets) {
  const std::size_t n = features.rows(), p = features.cols();
  if (targets.size() != n) throw InvalidArgument("linear_regression: target length does not match rows");
  if (n == 0) throw DegenerateInput("linear_regression: no observations");

  // Centering separates the intercept and keeps the normal equations well scaled.
  std::vector<double> col_mean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) col_mean[j] += features(i, j);
  }
  for (double& m : col_mean) m /= static_cast<double>(n);
  const double y_mean = mean(targets);

  LinearFit fit;
  fit.slopes.assign(p, 0.0);
  if (p == 0) {
    fit.intercept = y_mean;
    return fit;
  }
  Eigen::MatrixXd a(n, p);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) a(i, j) = features(i, j) - col_mean[j];
    y(i) = targets[i] - y_mean;
  }

  Eigen::VectorXd beta;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);  // relative to the largest pivot
  if (n > p && static_cast<std::size_t>(qr.rank()) == p) {
    beta = qr.solve(y);
  } else {
    constexpr double kLambda = 1e-6;
    Eigen::MatrixXd gram = a.transpose() * a;
    gram.diagonal().array() += kLambda;
    beta = gram.ldlt().solve(a.transpose() * y);
    fit.ridge_fallback = true;
  }
  double icpt = y_mean;
  for (std::size_t j = 0; j < p; ++j) {
    fit.slopes[j] = beta(static_cast<Eigen::Index>(j));
    icpt -= fit.slopes[j] * col_mean[j];
  }
  fit.intercept = icpt;
  return fit;
}

}  // namespace fdvae::num
