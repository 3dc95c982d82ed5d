#include "fdvae/numerics/mlp.hpp"

#include <cmath>

#include "fdvae/error.hpp"

namespace fdvae::num {

std::size_t ParameterSet::add(std::string name, Tensor value) {
  for (const auto& n : names_) {
    if (n == name) throw InvalidArgument("duplicate parameter name '" + name + "'");
  }
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

std::size_t ParameterSet::index(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw InvalidArgument("unknown parameter '" + name + "'");
}

bool ParameterSet::all_finite() const noexcept {
  for (const auto& v : values_) {
    if (!v.all_finite()) return false;
  }
  return true;
}

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

ParameterBinding::ParameterBinding(Tape& tape, const ParameterSet& params, bool trainable)
    : tape_(tape), params_(params), trainable_(trainable), bound_(params.size()),
      is_bound_(params.size(), false) {}

Var ParameterBinding::operator[](std::size_t i) {
  if (!is_bound_[i]) {
    bound_[i] = trainable_ ? tape_.variable(params_.value(i)) : tape_.constant(params_.value(i));
    is_bound_[i] = true;
  }
  return bound_[i];
}

std::vector<Tensor> ParameterBinding::gradients() {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (is_bound_[i] && trainable_) {
      out.push_back(tape_.grad(bound_[i]));
    } else {
      const Tensor& v = params_.value(i);
      out.emplace_back(v.rows(), v.cols());
    }
  }
  return out;
}

MlpParams MlpParams::create(ParameterSet& params, const std::string& prefix, std::size_t in,
                            std::span<const std::size_t> hidden_widths, std::size_t out,
                            Activation hidden, Pcg64& rng) {
  if (in == 0 || out == 0) throw InvalidArgument("mlp '" + prefix + "': zero-width input or output");
  MlpParams mlp;
  mlp.hidden = hidden;
  mlp.in = in;
  mlp.out = out;
  std::vector<std::size_t> widths{in};
  widths.insert(widths.end(), hidden_widths.begin(), hidden_widths.end());
  widths.push_back(out);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t fan_in = widths[l], fan_out = widths[l + 1];
    if (fan_out == 0) throw InvalidArgument("mlp '" + prefix + "': zero-width hidden layer");
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor w(fan_in, fan_out);
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    Tensor b(1, fan_out);
    for (double& v : b.values()) v = rng.uniform(-bound, bound);
    const std::string base = prefix + "." + std::to_string(l);
    MlpLayer layer;
    layer.weight = params.add(base + ".weight", std::move(w));
    layer.bias = params.add(base + ".bias", std::move(b));
    mlp.layers.push_back(layer);
  }
  return mlp;
}

Var MlpParams::forward(ParameterBinding& bind, Var x) const {
  if (x.cols() != in) {
    throw InvalidArgument("mlp: expected input width " + std::to_string(in) + ", got " +
                          x.value().shape_string());
  }
  Var h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = affine(h, bind[layers[l].weight], bind[layers[l].bias]);
    if (l + 1 < layers.size()) h = activation(h, hidden);
  }
  return h;
}

}  // namespace fdvae::num
