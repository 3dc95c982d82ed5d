#include "fdvae/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "broadcast.hpp"
#include "fdvae/error.hpp"
#include "fdvae/simd/kernels.hpp"

namespace fdvae::num {

using detail::index_for;
using detail::resolve_shape;

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::elu: return "elu";
    case Activation::tanh: return "tanh";
  }
  return "identity";
}

Activation activation_from_string(std::string_view s) {
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "elu") return Activation::elu;
  if (s == "tanh") return Activation::tanh;
  throw InvalidArgument("unknown activation '" + std::string(s) + "'");
}

Var affine(Var x, Var w, Var b) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  if (xv.cols() != wv.rows() || bv.rows() != 1 || bv.cols() != wv.cols()) {
    throw InvalidArgument("affine: incompatible shapes x" + xv.shape_string() + " W" +
                          wv.shape_string() + " b" + bv.shape_string());
  }
  const std::size_t n = xv.rows(), in = wv.rows(), out = wv.cols();
  Tensor y(n, out);
  simd::active().gemm_nn(xv.data(), wv.data(), bv.data(), y.data(), n, in, out);
  const std::size_t xi = x.id(), wi = w.id(), bi = b.id();
  return x.tape().record(std::move(y), {x, w, b}, [xi, wi, bi, n, in, out](Tape& t, std::size_t self) {
    const auto& k = simd::active();
    const Tensor& dy = t.grad_buffer(self);
    if (t.requires_grad(xi)) {
      Tensor dx(n, in);
      k.gemm_nt(dy.data(), t.value(wi).data(), dx.data(), n, out, in);
      Tensor& gx = t.grad_buffer(xi);
      k.axpy(1.0, dx.data(), gx.data(), dx.size());
    }
    if (t.requires_grad(wi)) {
      k.gemm_tn_acc(t.value(xi).data(), dy.data(), t.grad_buffer(wi).data(), n, in, out);
    }
    if (t.requires_grad(bi)) {
      Tensor& gb = t.grad_buffer(bi);
      for (std::size_t r = 0; r < n; ++r) k.axpy(1.0, dy.data() + r * out, gb.data(), out);
    }
  });
}

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw InvalidArgument("matmul: incompatible shapes " + av.shape_string() + " " + bv.shape_string());
  }
  const std::size_t n = av.rows(), k = av.cols(), m = bv.cols();
  Tensor y(n, m);
  simd::active().gemm_nn(av.data(), bv.data(), nullptr, y.data(), n, k, m);
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(std::move(y), {a, b}, [ai, bi, n, k, m](Tape& t, std::size_t self) {
    const auto& kern = simd::active();
    const Tensor& dy = t.grad_buffer(self);
    if (t.requires_grad(ai)) {
      Tensor da(n, k);
      kern.gemm_nt(dy.data(), t.value(bi).data(), da.data(), n, m, k);
      kern.axpy(1.0, da.data(), t.grad_buffer(ai).data(), da.size());
    }
    if (t.requires_grad(bi)) kern.gemm_tn_acc(t.value(ai).data(), dy.data(), t.grad_buffer(bi).data(), n, k, m);
  });
}

namespace {

template <class F, class D>
Var unary(Var x, F f, D dfdx) {
  const Tensor& xv = x.value();
  Tensor y(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(xv[i]);
  const std::size_t xi = x.id();
  return x.tape().record(std::move(y), {x}, [xi, dfdx](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad_buffer(self);
    const Tensor& xv = t.value(xi);
    const Tensor& yv = t.value(self);
    Tensor& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += dy[i] * dfdx(xv[i], yv[i]);
  });
}

// F(a, b) -> value; DA/DB(a, b, y) -> partials.
template <class F, class DA, class DB>
Var binary(const char* name, Var a, Var b, F f, DA dfa, DB dfb) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const auto shape = resolve_shape(name, {&av, &bv});
  const auto ia = index_for(av, shape);
  const auto ib = index_for(bv, shape);
  Tensor y(shape.rows, shape.cols);
  for (std::size_t r = 0; r < shape.rows; ++r) {
    for (std::size_t c = 0; c < shape.cols; ++c) y(r, c) = f(av[ia(r, c)], bv[ib(r, c)]);
  }
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(std::move(y), {a, b}, [=](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad_buffer(self);
    const Tensor& av = t.value(ai);
    const Tensor& bv = t.value(bi);
    const Tensor& yv = t.value(self);
    const bool ga = t.requires_grad(ai), gb = t.requires_grad(bi);
    Tensor* gA = ga ? &t.grad_buffer(ai) : nullptr;
    Tensor* gB = gb ? &t.grad_buffer(bi) : nullptr;
    for (std::size_t r = 0; r < shape.rows; ++r) {
      for (std::size_t c = 0; c < shape.cols; ++c) {
        const double g = dy(r, c);
        const double x = av[ia(r, c)], z = bv[ib(r, c)], v = yv(r, c);
        if (gA != nullptr) (*gA)[ia(r, c)] += g * dfa(x, z, v);
        if (gB != nullptr) (*gB)[ib(r, c)] += g * dfb(x, z, v);
      }
    }
  });
}

}  // namespace

Var activation(Var x, Activation tag) {
  switch (tag) {
    case Activation::identity:
      return unary(x, [](double v) { return v; }, [](double, double) { return 1.0; });
    case Activation::relu:
      return unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
                   [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::elu:
      return unary(x, [](double v) { return v > 0.0 ? v : std::expm1(v); },
                   [](double v, double y) { return v > 0.0 ? 1.0 : y + 1.0; });
    case Activation::tanh:
      return unary(x, [](double v) { return std::tanh(v); },
                   [](double, double y) { return 1.0 - y * y; });
  }
  throw InvalidArgument("activation: unknown tag");
}

Var add(Var a, Var b) {
  return binary("add", a, b, [](double x, double z) { return x + z; },
                [](double, double, double) { return 1.0; }, [](double, double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary("sub", a, b, [](double x, double z) { return x - z; },
                [](double, double, double) { return 1.0; }, [](double, double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary("mul", a, b, [](double x, double z) { return x * z; },
                [](double, double z, double) { return z; }, [](double x, double, double) { return x; });
}

Var scale(Var x, double s) {
  return unary(x, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Var exp(Var x) {
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Var clamp(Var x, double lo, double hi) {
  if (!(lo <= hi)) throw InvalidArgument("clamp: lo > hi");
  return unary(x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
               [lo, hi](double v, double) { return (v < lo || v > hi) ? 0.0 : 1.0; });
}

Var concat_cols(std::span<const Var> xs) {
  if (xs.empty()) throw InvalidArgument("concat_cols: no inputs");
  const std::size_t n = xs.front().rows();
  std::size_t total = 0;
  for (const Var& v : xs) {
    if (v.rows() != n) {
      throw InvalidArgument("concat_cols: row mismatch " + xs.front().value().shape_string() + " vs " +
                            v.value().shape_string());
    }
    total += v.cols();
  }
  Tensor y(n, total);
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> ids;
  std::size_t off = 0;
  for (const Var& v : xs) {
    const Tensor& xv = v.value();
    for (std::size_t r = 0; r < n; ++r) {
      std::copy(xv.row(r).begin(), xv.row(r).end(), y.row(r).begin() + static_cast<std::ptrdiff_t>(off));
    }
    offsets.push_back(off);
    ids.push_back(v.id());
    off += xv.cols();
  }
  std::vector<Var> inputs(xs.begin(), xs.end());
  return xs.front().tape().record(std::move(y), inputs, [offsets, ids, n](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad_buffer(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!t.requires_grad(ids[k])) continue;
      Tensor& g = t.grad_buffer(ids[k]);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) += dy(r, offsets[k] + c);
      }
    }
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  const Tensor& xv = x.value();
  if (begin + count > xv.cols() || count == 0) {
    throw InvalidArgument("slice_cols: columns [" + std::to_string(begin) + ", " +
                          std::to_string(begin + count) + ") out of range for " + xv.shape_string());
  }
  Tensor y(xv.rows(), count);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) y(r, c) = xv(r, begin + c);
  }
  const std::size_t xi = x.id();
  return x.tape().record(std::move(y), {x}, [xi, begin, count](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad_buffer(self);
    Tensor& g = t.grad_buffer(xi);
    for (std::size_t r = 0; r < dy.rows(); ++r) {
      for (std::size_t c = 0; c < count; ++c) g(r, begin + c) += dy(r, c);
    }
  });
}

Var sum_cols(Var x) {
  const Tensor& xv = x.value();
  Tensor y(xv.rows(), 1);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    double s = 0.0;
    for (double v : xv.row(r)) s += v;
    y[r] = s;
  }
  const std::size_t xi = x.id();
  return x.tape().record(std::move(y), {x}, [xi](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad_buffer(self);
    Tensor& g = t.grad_buffer(xi);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) += dy[r];
    }
  });
}

Var sum(Var x) {
  const Tensor& xv = x.value();
  double s = 0.0;
  for (double v : xv.values()) s += v;
  const std::size_t xi = x.id();
  return x.tape().record(Tensor::scalar(s), {x}, [xi](Tape& t, std::size_t self) {
    const double g = t.grad_buffer(self)[0];
    Tensor& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

Var mean(Var x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw InvalidArgument("mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

}  // namespace fdvae::num
