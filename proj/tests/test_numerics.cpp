#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "fdvae/error.hpp"
#include "fdvae/numerics/adam.hpp"
#include "fdvae/numerics/checkpoint.hpp"
#include "fdvae/numerics/distributions.hpp"
#include "fdvae/numerics/mlp.hpp"
#include "fdvae/numerics/ops.hpp"
#include "fdvae/numerics/rng.hpp"
#include "fdvae/numerics/stats.hpp"
#include "fdvae/simd/kernels.hpp"
#include "support.hpp"

using namespace fdvae;
using namespace fdvae::num;
using testsupport::gradient_error;
using testsupport::random_tensor;

TEST_SUITE("rng") {
  TEST_CASE("same seed and tag reproduce the sequence") {
    auto a = Pcg64::derive(42, "rows");
    auto b = Pcg64::derive(42, "rows");
    for (int i = 0; i < 1000; ++i) CHECK(a() == b());
  }

  TEST_CASE("different tags and seeds give different streams") {
    auto a = Pcg64::derive(42, "rows");
    auto b = Pcg64::derive(42, "coefficients");
    auto c = Pcg64::derive(43, "rows");
    int same_ab = 0, same_ac = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto x = a(), y = b(), z = c();
      same_ab += x == y;
      same_ac += x == z;
    }
    CHECK(same_ab == 0);
    CHECK(same_ac == 0);
  }

  TEST_CASE("uniform, below and normal moments") {
    Pcg64 rng(7);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      su += u;
      const double z = rng.normal();
      sn += z;
      sn2 += z * z;
      REQUIRE(rng.below(7) < 7);
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / n) < 4.0 / std::sqrt(n));
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("below covers every residue") {
    Pcg64 rng(3);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(rng.below(5));
    CHECK(seen.size() == 5);
  }
}

TEST_SUITE("simd") {
  // Naive loops written independently of both kernel tables.
  void naive_gemm_nn(const Tensor& a, const Tensor& b, Tensor& c) {
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) {
        double s = 0;
        for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
        c(i, j) = s;
      }
  }

  void check_table(const simd::KernelTable& kt) {
    Pcg64 rng(11);
    for (std::size_t n : {1u, 3u, 4u, 7u, 16u, 17u, 33u}) {
      for (std::size_t k : {1u, 2u, 5u, 8u, 19u}) {
        for (std::size_t m : {1u, 3u, 4u, 15u, 16u, 21u, 64u}) {
          const Tensor a = random_tensor(n, k, rng);
          const Tensor b = random_tensor(k, m, rng);
          const Tensor bias = random_tensor(1, m, rng);
          Tensor c(n, m), ref(n, m);
          kt.gemm_nn(a.data(), b.data(), bias.data(), c.data(), n, k, m);
          naive_gemm_nn(a, b, ref);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) REQUIRE(c(i, j) == doctest::Approx(ref(i, j) + bias[j]).epsilon(1e-12));

          // c2[n x k] = c[n x m] * b^T[m x k]
          Tensor c2(n, k);
          kt.gemm_nt(c.data(), b.data(), c2.data(), n, m, k);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j) {
              double s = 0;
              for (std::size_t q = 0; q < m; ++q) s += c(i, q) * b(j, q);
              REQUIRE(c2(i, j) == doctest::Approx(s).epsilon(1e-12));
            }

          // acc[k x m] += a^T[k x n] * c[n x m]
          Tensor acc = random_tensor(k, m, rng);
          const Tensor acc0 = acc;
          kt.gemm_tn_acc(a.data(), c.data(), acc.data(), n, k, m);
          for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < m; ++j) {
              double s = acc0(i, j);
              for (std::size_t q = 0; q < n; ++q) s += a(q, i) * c(q, j);
              REQUIRE(acc(i, j) == doctest::Approx(s).epsilon(1e-12));
            }
        }
      }
    }
  }

  TEST_CASE("scalar kernels match naive loops") { check_table(simd::scalar_kernels()); }

  TEST_CASE("avx2 kernels match naive loops") {
    const auto* kt = simd::avx2_kernels();
    if (!kt) {
      MESSAGE("AVX2 variant unavailable on this machine");
      return;
    }
    check_table(*kt);
  }

  TEST_CASE("avx2 and scalar agree on dot, axpy and adam") {
    const auto* kt = simd::avx2_kernels();
    if (!kt) return;
    const auto& sc = simd::scalar_kernels();
    Pcg64 rng(5);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 13u, 100u, 1027u}) {
      const Tensor x = random_tensor(1, n, rng), y0 = random_tensor(1, n, rng);
      if (n > 0) CHECK(kt->dot(x.data(), y0.data(), n) == doctest::Approx(sc.dot(x.data(), y0.data(), n)).epsilon(1e-12));
      Tensor y1 = y0, y2 = y0;
      kt->axpy(0.37, x.data(), y1.data(), n);
      sc.axpy(0.37, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

      Tensor p1 = random_tensor(1, n, rng), m1 = random_tensor(1, n, rng), v1 = random_tensor(1, n, rng, 0.0, 1.0);
      Tensor p2 = p1, m2 = m1, v2 = v1;
      const simd::AdamCoefficients coef{1e-3, 0.9, 0.999, 1e-8};
      kt->adam_update(p1.data(), m1.data(), v1.data(), x.data(), n, coef);
      sc.adam_update(p2.data(), m2.data(), v2.data(), x.data(), n, coef);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-13));
        CHECK(m1[i] == doctest::Approx(m2[i]).epsilon(1e-13));
        CHECK(v1[i] == doctest::Approx(v2[i]).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("span wrappers validate lengths") {
    std::vector<double> a(3, 1.0), b(4, 1.0);
    CHECK_THROWS_AS(simd::dot(a, b), InvalidArgument);
    CHECK_THROWS_AS(simd::axpy(1.0, a, b), InvalidArgument);
  }
}

TEST_SUITE("tape") {
  TEST_CASE("d/dx x*x at 3 is 6") {
    Tape tape;
    Var x = tape.variable(Tensor::scalar(3.0));
    tape.backward(sum(mul(x, x)));
    CHECK(tape.grad(x)[0] == doctest::Approx(6.0));
  }

  TEST_CASE("gradient of a constant is zero") {
    Tape tape;
    Var x = tape.variable(Tensor::scalar(3.0));
    Var c = tape.constant(Tensor::scalar(5.0));
    Var out = sum(add(c, scale(x, 0.0)));
    tape.backward(out);
    CHECK(tape.grad(x)[0] == 0.0);
    CHECK(tape.grad(c)[0] == 0.0);
  }

  TEST_CASE("non-scalar output and second backward are rejected") {
    Tape tape;
    Var x = tape.variable(Tensor(2, 2, 1.0));
    CHECK_THROWS_AS(tape.backward(x), InvalidArgument);
    Var s = sum(x);
    tape.backward(s);
    CHECK_THROWS_AS(tape.backward(s), InvalidArgument);
  }

  TEST_CASE("affine with identity weight and zero bias is the identity") {
    Pcg64 rng(1);
    Tape tape;
    const Tensor xv = random_tensor(5, 3, rng);
    Tensor eye(3, 3);
    for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
    Var y = affine(tape.constant(xv), tape.constant(eye), tape.constant(Tensor(1, 3)));
    CHECK(y.value() == xv);
  }

  TEST_CASE("activations at zero and relu(-1)") {
    Tape tape;
    Var z = tape.constant(Tensor::scalar(0.0));
    CHECK(activation(z, Activation::tanh).value()[0] == 0.0);
    CHECK(activation(z, Activation::elu).value()[0] == 0.0);
    CHECK(activation(z, Activation::identity).value()[0] == 0.0);
    CHECK(activation(tape.constant(Tensor::scalar(-1.0)), Activation::relu).value()[0] == 0.0);
    CHECK(activation(tape.constant(Tensor::scalar(-1.0)), Activation::elu).value()[0] == doctest::Approx(std::expm1(-1.0)));
  }

  TEST_CASE("shape mismatch names both shapes") {
    Tape tape;
    Var a = tape.constant(Tensor(2, 3));
    Var b = tape.constant(Tensor(3, 2));
    try {
      (void)add(a, b);
      FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
      const std::string msg = e.what();
      CHECK(msg.find("[2 x 3]") != std::string::npos);
      CHECK(msg.find("[3 x 2]") != std::string::npos);
    }
    CHECK_THROWS_AS(matmul(a, a), InvalidArgument);
    CHECK_THROWS_AS(affine(a, tape.constant(Tensor(2, 2)), tape.constant(Tensor(1, 2))), InvalidArgument);
  }

  TEST_CASE("composite forward matches a tape-free recompute") {
    Pcg64 rng(9);
    const Tensor x = random_tensor(4, 3, rng), w = random_tensor(3, 2, rng), b = random_tensor(1, 2, rng);
    Tape tape;
    Var h = activation(affine(tape.constant(x), tape.constant(w), tape.constant(b)), Activation::tanh);
    Var out = mean(mul(exp(scale(h, 0.5)), h));
    double ref = 0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        double s = b[j];
        for (std::size_t k = 0; k < 3; ++k) s += x(i, k) * w(k, j);
        const double hv = std::tanh(s);
        ref += std::exp(0.5 * hv) * hv;
      }
    CHECK(out.value()[0] == doctest::Approx(ref / 8.0).epsilon(1e-14));
  }
}

TEST_SUITE("gradients") {
  Pcg64 g_rng(2024);

  TEST_CASE("linear algebra primitives") {
    auto& rng = g_rng;
    CHECK(gradient_error([](Tape&, const std::vector<Var>& v) { return sum(affine(v[0], v[1], v[2])); },
                         {random_tensor(5, 3, rng), random_tensor(3, 4, rng), random_tensor(1, 4, rng)}) < 1e-6);
    CHECK(gradient_error([](Tape&, const std::vector<Var>& v) { return sum(mul(matmul(v[0], v[1]), matmul(v[0], v[1]))); },
                         {random_tensor(4, 6, rng), random_tensor(6, 17, rng)}) < 1e-6);
  }

  TEST_CASE("activations") {
    auto& rng = g_rng;
    for (Activation a : {Activation::identity, Activation::elu, Activation::tanh, Activation::relu}) {
      Tensor x = random_tensor(4, 5, rng);
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) < 1e-3) x[i] = 0.5;  // keep away from the relu kink
      }
      CAPTURE(to_string(a));
      CHECK(gradient_error([a](Tape&, const std::vector<Var>& v) { return sum(mul(activation(v[0], a), v[0])); }, {x}) < 1e-6);
    }
  }

  TEST_CASE("broadcasting elementwise ops") {
    auto& rng = g_rng;
    const std::vector<std::pair<std::size_t, std::size_t>> shapes{{4, 3}, {1, 3}, {4, 1}, {1, 1}};
    for (auto [r, c] : shapes) {
      const Tensor full = random_tensor(4, 3, rng), part = random_tensor(r, c, rng, 0.5, 1.5);
      CHECK(gradient_error([](Tape&, const std::vector<Var>& v) { return sum(mul(add(v[0], v[1]), v[0])); }, {full, part}) < 1e-6);
      CHECK(gradient_error([](Tape&, const std::vector<Var>& v) { return sum(mul(sub(v[1], v[0]), v[0])); }, {full, part}) < 1e-6);
      CHECK(gradient_error([](Tape&, const std::vector<Var>& v) { return sum(mul(mul(v[1], v[0]), v[1])); }, {full, part}) < 1e-6);
    }
  }

  TEST_CASE("unary ops, slicing and reductions") {
    auto& rng = g_rng;
    const Tensor x = random_tensor(3, 5, rng), y = random_tensor(3, 2, rng);
    CHECK(gradient_error([](Tape&, const std::vector<Var>& v) { return mean(exp(scale(v[0], 1.7))); }, {x}) < 1e-6);
    CHECK(gradient_error([](Tape&, const std::vector<Var>& v) { return sum(mul(clamp(v[0], -0.5, 0.5), v[0])); }, {x}) < 1e-6);
    CHECK(gradient_error(
              [](Tape&, const std::vector<Var>& v) {
                const std::vector<Var> parts{v[0], v[1], v[0]};
                Var cat = concat_cols(parts);
                return sum(mul(sum_cols(slice_cols(cat, 3, 4)), sum_cols(cat)));
              },
              {x, y}) < 1e-6);
  }

  TEST_CASE("probability primitives") {
    auto& rng = g_rng;
    const Tensor x = random_tensor(6, 2, rng, -2, 2), mu = random_tensor(6, 2, rng), lv = random_tensor(6, 2, rng);
    CHECK(gradient_error([](Tape&, const std::vector<Var>& v) { return sum(gaussian_log_density(v[0], v[1], v[2])); },
                         {x, mu, lv}) < 1e-6);
    const Tensor mp = random_tensor(6, 2, rng), lp = random_tensor(6, 2, rng);
    CHECK(gradient_error([](Tape&, const std::vector<Var>& v) { return sum(kl_diag_gaussians(v[0], v[1], v[2], v[3])); },
                         {mu, lv, mp, lp}) < 1e-6);
    Tensor bits(6, 2);
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = static_cast<double>(rng.below(2));
    const Tensor logits = random_tensor(6, 2, rng, -4, 4);
    CHECK(gradient_error(
              [&bits](Tape& tape, const std::vector<Var>& v) { return sum(bernoulli_log_density(tape.constant(bits), v[0])); },
              {logits}) < 1e-6);
    const Tensor eps = random_tensor(6, 2, rng);
    CHECK(gradient_error([&eps](Tape&, const std::vector<Var>& v) {
            Var s = reparameterize(v[0], v[1], eps);
            return sum(mul(s, s));
          }, {mu, lv}) < 1e-6);
  }

  TEST_CASE("random three-layer mlp loss against finite differences") {
    Pcg64 rng(77);
    ParameterSet ps;
    const std::vector<std::size_t> hidden{7, 5};
    MlpParams net = MlpParams::create(ps, "net", 4, hidden, 3, Activation::elu, rng);
    const Tensor x = random_tensor(9, 4, rng), target = random_tensor(9, 3, rng);
    std::vector<Tensor> inputs;
    for (std::size_t i = 0; i < ps.size(); ++i) inputs.push_back(ps.value(i));
    auto f = [&](Tape& tape, const std::vector<Var>& v) {
      Var h = tape.constant(x);
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        h = affine(h, v[net.layers[l].weight], v[net.layers[l].bias]);
        if (l + 1 < net.layers.size()) h = activation(h, net.hidden);
      }
      Var d = sub(h, tape.constant(target));
      return mean(mul(d, d));
    };
    CHECK(gradient_error(f, inputs, 1e-4) < 1e-4);

    // ParameterBinding path gives the same gradients as explicit leaves.
    Tape tape;
    ParameterBinding bind(tape, ps);
    Var d = sub(net.forward(bind, tape.constant(x)), tape.constant(target));
    tape.backward(mean(mul(d, d)));
    const auto grads = bind.gradients();
    Tape tape2;
    std::vector<Var> leaves;
    for (const auto& t : inputs) leaves.push_back(tape2.variable(t));
    Var out2 = f(tape2, leaves);
    tape2.backward(out2);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const Tensor& g2 = tape2.grad(leaves[i]);
      for (std::size_t k = 0; k < g2.size(); ++k) CHECK(grads[i][k] == doctest::Approx(g2[k]).epsilon(1e-12));
    }
  }
}

TEST_SUITE("distributions") {
  TEST_CASE("gaussian log density values") {
    CHECK(gaussian_log_density(0.0, 0.0, 0.0) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
    const double lv = std::log(2.25);
    CHECK(gaussian_log_density(1.5, 0.0, lv) == doctest::Approx(gaussian_log_density(0.0, 0.0, lv) - 0.5).epsilon(1e-14));
  }

  TEST_CASE("gaussian density integrates to one") {
    const double mu = 0.3, lv = std::log(0.7);
    const double lo = -15.0, hi = 15.0;
    const int steps = 200000;
    const double h = (hi - lo) / steps;
    double s = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
      s += w * std::exp(gaussian_log_density(lo + i * h, mu, lv));
    }
    CHECK(std::abs(s * h - 1.0) < 1e-4);
  }

  TEST_CASE("bernoulli log density") {
    CHECK(bernoulli_log_density(0.0, 0.0) == doctest::Approx(std::log(0.5)));
    CHECK(bernoulli_log_density(1.0, 0.0) == doctest::Approx(std::log(0.5)));
    const double v = bernoulli_log_density(1.0, 40.0);
    CHECK(std::isfinite(v));
    CHECK(std::abs(v) < 1e-15);
    Pcg64 rng(4);
    for (int i = 0; i < 200; ++i) {
      const double l = rng.uniform(-50, 50);
      const double p0 = std::exp(bernoulli_log_density(0.0, l)), p1 = std::exp(bernoulli_log_density(1.0, l));
      CHECK(std::abs(p0 + p1 - 1.0) < 1e-12);
      CHECK(std::isfinite(bernoulli_log_density(0.0, l)));
      CHECK(std::isfinite(bernoulli_log_density(1.0, l)));
      CHECK(std::isfinite(gaussian_log_density(l, -l, rng.uniform(-10, 10))));
    }
  }

  TEST_CASE("bernoulli rejects non-binary observations") {
    Tape tape;
    CHECK_THROWS_AS(bernoulli_log_density(tape.constant(Tensor::scalar(0.5)), tape.constant(Tensor::scalar(0.0))),
                    InvalidArgument);
  }

  TEST_CASE("kl closed form, sign and monte carlo") {
    CHECK(kl_diag_gaussians(0.4, -0.3, 0.4, -0.3) == 0.0);
    CHECK(kl_diag_gaussians(1.0, 0.0, 0.0, 0.0) == doctest::Approx(0.5));
    Pcg64 rng(8);
    for (int i = 0; i < 1000; ++i) {
      CHECK(kl_diag_gaussians(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)) > 0.0);
    }
    const double mq = 0.7, lq = -0.4, mp = -0.2, lp = 0.3;
    const int n = 1000000;
    double s = 0.0;
    const double sq = std::exp(0.5 * lq);
    for (int i = 0; i < n; ++i) {
      const double z = mq + sq * rng.normal();
      s += gaussian_log_density(z, mq, lq) - gaussian_log_density(z, mp, lp);
    }
    CHECK(s / n == doctest::Approx(kl_diag_gaussians(mq, lq, mp, lp)).epsilon(0.01));
  }

  TEST_CASE("reparameterize values and moments") {
    Tape tape;
    Var mu = tape.constant(Tensor::scalar(1.25));
    CHECK(reparameterize(mu, tape.constant(Tensor::scalar(0.7)), Tensor::scalar(0.0)).value()[0] == 1.25);
    CHECK(reparameterize(mu, tape.constant(Tensor::scalar(0.0)), Tensor::scalar(1.0)).value()[0] == 2.25);

    Pcg64 rng(12);
    const std::size_t n = 100000;
    Tensor eps(n, 1);
    for (std::size_t i = 0; i < n; ++i) eps[i] = rng.normal();
    Tape t2;
    const double m = -0.4, lv = 0.6;
    Var draws = reparameterize(t2.constant(Tensor::scalar(m)), t2.constant(Tensor::scalar(lv)), eps);
    const auto vals = draws.value().values();
    const double var = std::exp(lv);
    CHECK(std::abs(num::mean(vals) - m) < 3.0 * std::sqrt(var / n));
    CHECK(std::abs(sample_variance(vals) - var) < 3.0 * var * std::sqrt(2.0 / (n - 1)));
  }
}

TEST_SUITE("adam") {
  TEST_CASE("zero gradient leaves parameters and advances step") {
    ParameterSet ps;
    ps.add("w", Tensor(2, 2, 0.5));
    AdamState st(ps, AdamOptions{});
    std::vector<Tensor> g{Tensor(2, 2, 0.0)};
    adam_step(ps, g, st);
    CHECK(ps.value(0) == Tensor(2, 2, 0.5));
    CHECK(st.step == 1);
  }

  TEST_CASE("first step moves by the learning rate") {
    ParameterSet ps;
    ps.add("w", Tensor::from_rows({{0.0, 0.0, 0.0}}));
    AdamState st(ps, AdamOptions{0.01, 0.9, 0.999, 1e-8});
    std::vector<Tensor> g{Tensor::from_rows({{3.0, -0.002, 250.0}})};
    adam_step(ps, g, st);
    CHECK(ps.value(0)[0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(ps.value(0)[1] == doctest::Approx(0.01).epsilon(1e-4));
    CHECK(ps.value(0)[2] == doctest::Approx(-0.01).epsilon(1e-6));
  }

  TEST_CASE("quadratic bowl converges and matches the scalar recurrence") {
    ParameterSet ps;
    ps.add("w", Tensor::scalar(1.0));
    const AdamOptions opts{0.05, 0.9, 0.999, 1e-8};
    AdamState st(ps, opts);
    double w = 1.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 500; ++t) {
      std::vector<Tensor> g{Tensor::scalar(2.0 * ps.value(0)[0])};
      adam_step(ps, g, st);
      const double gr = 2.0 * w;
      m = opts.beta1 * m + (1 - opts.beta1) * gr;
      v = opts.beta2 * v + (1 - opts.beta2) * gr * gr;
      w -= opts.learning_rate * (m / (1 - std::pow(opts.beta1, t))) /
           (std::sqrt(v / (1 - std::pow(opts.beta2, t))) + opts.epsilon);
      REQUIRE(ps.value(0)[0] == doctest::Approx(w).epsilon(1e-9).scale(1e-9));
    }
    CHECK(std::abs(ps.value(0)[0]) < 1e-2);
  }

  TEST_CASE("non-finite gradient names the block and changes nothing") {
    ParameterSet ps;
    ps.add("enc.0.weight", Tensor(1, 2, 1.0));
    ps.add("enc.0.bias", Tensor(1, 2, 1.0));
    AdamState st(ps, AdamOptions{});
    std::vector<Tensor> g{Tensor(1, 2, 0.1), Tensor::from_rows({{0.0, std::nan("")}})};
    try {
      adam_step(ps, g, st);
      FAIL("expected TrainingDivergence");
    } catch (const TrainingDivergence& e) {
      CHECK(e.culprit() == "enc.0.bias");
    }
    CHECK(st.step == 0);
    CHECK(ps.value(0) == Tensor(1, 2, 1.0));
  }
}

TEST_SUITE("stats") {
  TEST_CASE("pcc identities") {
    const std::vector<double> v{1.0, 2.5, -0.3, 4.0, 2.2};
    std::vector<double> w;
    for (double x : v) w.push_back(-2.0 * x + 3.0);
    CHECK(pcc(v, v) == doctest::Approx(1.0));
    CHECK(pcc(v, w) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(pcc(v, std::vector<double>(5, 1.0)), DegenerateInput);
    CHECK_THROWS_AS(pcc(v, std::vector<double>(4, 1.0)), InvalidArgument);
    CHECK_THROWS_AS(pcc(std::vector<double>{1.0}, std::vector<double>{1.0}), InvalidArgument);
  }

  TEST_CASE("independent vectors are nearly uncorrelated") {
    Pcg64 rng(31);
    std::vector<double> a(10000), b(10000);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    CHECK(std::abs(pcc(a, b)) < 0.05);
  }

  TEST_CASE("spearman uses average ranks") {
    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> b{1, 4, 9, 16, 25};
    CHECK(spearman(a, b) == doctest::Approx(1.0));
    const std::vector<double> c{1, 1, 2, 2, 3};
    const std::vector<double> rc{1.5, 1.5, 3.5, 3.5, 5};
    CHECK(spearman(a, c) == doctest::Approx(pcc(a, rc)));
  }

  TEST_CASE("exact linear targets recover coefficients") {
    Pcg64 rng(6);
    Tensor x = random_tensor(50, 3, rng, -2, 2);
    std::vector<double> y;
    for (std::size_t i = 0; i < 50; ++i) y.push_back(0.7 + 1.5 * x(i, 0) - 2.0 * x(i, 1) + 0.25 * x(i, 2));
    const LinearFit fit = linear_regression(x, y);
    CHECK_FALSE(fit.ridge_fallback);
    CHECK(std::abs(fit.intercept - 0.7) < 1e-8);
    CHECK(std::abs(fit.slopes[0] - 1.5) < 1e-8);
    CHECK(std::abs(fit.slopes[1] + 2.0) < 1e-8);
    CHECK(std::abs(fit.slopes[2] - 0.25) < 1e-8);
    CHECK(fit.predict(x.row(3)) == doctest::Approx(y[3]));
  }

  TEST_CASE("constant target gives zero slopes") {
    Pcg64 rng(6);
    Tensor x = random_tensor(20, 2, rng);
    const std::vector<double> y(20, 4.5);
    const LinearFit fit = linear_regression(x, y);
    CHECK(std::abs(fit.slopes[0]) < 1e-10);
    CHECK(std::abs(fit.slopes[1]) < 1e-10);
    CHECK(fit.intercept == doctest::Approx(4.5));
  }

  TEST_CASE("noisy data within three standard errors") {
    Pcg64 rng(13);
    const std::size_t n = 10000;
    Tensor x = random_tensor(n, 2, rng, -1, 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 + 2.0 * x(i, 0) - 1.0 * x(i, 1) + 0.5 * rng.normal();
    const LinearFit fit = linear_regression(x, y);
    // Var(U(-1,1)) = 1/3, so se(slope) ~ 0.5 / sqrt(n/3).
    const double se = 0.5 / std::sqrt(n / 3.0);
    CHECK(std::abs(fit.slopes[0] - 2.0) < 3 * se);
    CHECK(std::abs(fit.slopes[1] + 1.0) < 3 * se);
    CHECK(std::abs(fit.intercept - 1.0) < 3 * 0.5 / std::sqrt(double(n)));
  }

  TEST_CASE("rank deficiency switches to ridge") {
    Pcg64 rng(2);
    Tensor x(30, 2);
    std::vector<double> y(30);
    for (std::size_t i = 0; i < 30; ++i) {
      x(i, 0) = rng.normal();
      x(i, 1) = 2.0 * x(i, 0);
      y[i] = 3.0 * x(i, 0);
    }
    const LinearFit fit = linear_regression(x, y);
    CHECK(fit.ridge_fallback);
    for (std::size_t i = 0; i < 30; ++i) CHECK(fit.predict(x.row(i)) == doctest::Approx(y[i]).epsilon(1e-4));
    const LinearFit tiny = linear_regression(Tensor::from_rows({{1.0, 2.0}}), std::vector<double>{1.0});
    CHECK(tiny.ridge_fallback);
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("json round trip is exact") {
    Pcg64 rng(19);
    ParameterSet ps;
    const std::vector<std::size_t> hidden{4};
    MlpParams::create(ps, "g1", 3, hidden, 2, Activation::elu, rng);
    const auto doc = parameters_to_json(ps, {{"note", "x"}});
    ParameterSet copy = ps;
    for (std::size_t i = 0; i < copy.size(); ++i) copy.value(i).fill(0.0);
    parameters_from_json(nlohmann::json::parse(doc.dump()), copy);
    CHECK(copy == ps);
  }

  TEST_CASE("shape and version mismatches are data errors") {
    ParameterSet ps;
    ps.add("w", Tensor(2, 2, 1.0));
    auto doc = parameters_to_json(ps);
    ParameterSet other;
    other.add("w", Tensor(2, 3));
    CHECK_THROWS_AS(parameters_from_json(doc, other), DataError);
    doc["version"] = 99;
    CHECK_THROWS_AS(parameters_from_json(doc, ps), DataError);
  }

  TEST_CASE("duplicate parameter names are rejected") {
    ParameterSet ps;
    ps.add("w", Tensor(1, 1));
    CHECK_THROWS_AS(ps.add("w", Tensor(1, 1)), InvalidArgument);
  }
}
