#include "fdvae/graph/scm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fdvae/error.hpp"

namespace fdvae::graph {

namespace {

// Advances a mixed-radix counter (last digit fastest). Returns false on wrap.
bool advance(std::vector<std::size_t>& digits, const std::vector<std::size_t>& radix) {
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (++digits[i] < radix[i]) return true;
    digits[i] = 0;
  }
  return false;
}

std::size_t checked_product(const std::vector<std::size_t>& radix) {
  std::size_t total = 1;
  for (std::size_t r : radix) {
    if (r != 0 && total > std::numeric_limits<std::size_t>::max() / r) return std::numeric_limits<std::size_t>::max();
    total *= r;
  }
  return total;
}

std::string cell_name(const ProbTable::Assignment& cell) {
  std::string s = "{";
  for (std::size_t i = 0; i < cell.size(); ++i) {
    if (i) s += ", ";
    s += "#" + std::to_string(cell[i].first) + "=" + std::to_string(cell[i].second);
  }
  return s + "}";
}

}  // namespace

DiscreteScm::DiscreteScm(Dag dag, std::vector<std::size_t> cardinalities, std::vector<std::vector<double>> cpts,
                         std::vector<std::vector<double>> values)
    : dag_(std::move(dag)), card_(std::move(cardinalities)), cpts_(std::move(cpts)), values_(std::move(values)) {
  const std::size_t n = dag_.size();
  if (card_.size() != n || cpts_.size() != n) throw InvalidArgument("scm: need one domain and one cpt per node");
  for (std::size_t v = 0; v < n; ++v) {
    if (card_[v] < 2) throw InvalidArgument("scm: domain of '" + dag_.name(v) + "' must have at least 2 values");
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t rows = 1;
    for (NodeId p : dag_.parents(v)) rows *= card_[p];
    if (cpts_[v].size() != rows * card_[v]) {
      throw InvalidArgument("scm: cpt of '" + dag_.name(v) + "' has " + std::to_string(cpts_[v].size()) +
                            " entries, expected " + std::to_string(rows * card_[v]));
    }
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < card_[v]; ++k) {
        const double p = cpts_[v][r * card_[v] + k];
        if (!(p >= 0.0)) throw InvalidArgument("scm: negative or NaN cpt entry for '" + dag_.name(v) + "'");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-12) {
        throw InvalidArgument("scm: cpt row " + std::to_string(r) + " of '" + dag_.name(v) + "' sums to " +
                              std::to_string(s));
      }
    }
  }
  if (values_.empty()) {
    values_.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t k = 0; k < card_[v]; ++k) values_[v].push_back(static_cast<double>(k));
    }
  } else if (values_.size() != n) {
    throw InvalidArgument("scm: value coding must cover every node");
  } else {
    for (std::size_t v = 0; v < n; ++v) {
      if (values_[v].size() != card_[v]) throw InvalidArgument("scm: value coding size mismatch for '" + dag_.name(v) + "'");
    }
  }
}

std::size_t DiscreteScm::cpt_row(NodeId v, std::span<const std::size_t> assignment) const {
  std::size_t row = 0;
  for (NodeId p : dag_.parents(v)) row = row * card_[p] + assignment[p];
  return row;
}

double DiscreteScm::conditional(NodeId v, std::span<const std::size_t> assignment) const {
  return cpts_[v][cpt_row(v, assignment) * card_[v] + assignment[v]];
}

std::size_t DiscreteScm::state_count() const { return checked_product(card_); }

ProbTable::ProbTable(std::vector<NodeId> vars, std::vector<std::size_t> cards, std::vector<double> probs)
    : vars_(std::move(vars)), cards_(std::move(cards)), probs_(std::move(probs)) {
  if (vars_.size() != cards_.size()) throw InvalidArgument("prob table: variable/cardinality count mismatch");
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (vars_[i] == vars_[j]) throw InvalidArgument("prob table: repeated variable");
    }
  }
  if (checked_product(cards_) != probs_.size()) throw InvalidArgument("prob table: size does not match cardinalities");
}

double ProbTable::total() const {
  double s = 0.0;
  for (double p : probs_) s += p;
  return s;
}

bool ProbTable::contains(NodeId v) const { return std::find(vars_.begin(), vars_.end(), v) != vars_.end(); }

std::size_t ProbTable::card_of(NodeId v) const {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (vars_[i] == v) return cards_[i];
  }
  throw InvalidArgument("prob table: variable " + std::to_string(v) + " not in table");
}

std::vector<std::size_t> ProbTable::decode(std::size_t index) const {
  std::vector<std::size_t> s(vars_.size());
  for (std::size_t i = vars_.size(); i-- > 0;) {
    s[i] = index % cards_[i];
    index /= cards_[i];
  }
  return s;
}

double ProbTable::at(std::span<const std::size_t> states) const {
  if (states.size() != vars_.size()) throw InvalidArgument("prob table: state vector length mismatch");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (states[i] >= cards_[i]) throw InvalidArgument("prob table: state out of range");
    idx = idx * cards_[i] + states[i];
  }
  return probs_[idx];
}

ProbTable ProbTable::marginal(const NodeSet& keep) const {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> kcards;
  for (NodeId v : keep) {
    const auto it = std::find(vars_.begin(), vars_.end(), v);
    if (it == vars_.end()) throw InvalidArgument("prob table: variable " + std::to_string(v) + " not in table");
    pos.push_back(static_cast<std::size_t>(it - vars_.begin()));
    kcards.push_back(cards_[pos.back()]);
  }
  std::vector<double> out(checked_product(kcards), 0.0);
  std::vector<std::size_t> digits(vars_.size(), 0);
  for (std::size_t flat = 0; flat < probs_.size(); ++flat) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < pos.size(); ++k) idx = idx * kcards[k] + digits[pos[k]];
    out[idx] += probs_[flat];
    advance(digits, cards_);
  }
  return ProbTable(keep, std::move(kcards), std::move(out));
}

double ProbTable::prob(const Assignment& event) const {
  NodeSet keep;
  std::vector<std::size_t> states;
  for (const auto& [v, s] : event) {
    keep.push_back(v);
    states.push_back(s);
  }
  if (keep.empty()) return total();
  return marginal(keep).at(states);
}

ProbTable joint_distribution(const DiscreteScm& scm, std::size_t cap) {
  const std::size_t states = scm.state_count();
  if (states > cap) {
    throw ResourceLimit("joint_distribution: " + std::to_string(states) + " states exceed the cap of " +
                        std::to_string(cap));
  }
  const std::size_t n = scm.dag().size();
  NodeSet vars(n);
  for (std::size_t v = 0; v < n; ++v) vars[v] = v;
  std::vector<double> probs(states);
  std::vector<std::size_t> digits(n, 0);
  for (std::size_t flat = 0; flat < states; ++flat) {
    double p = 1.0;
    for (std::size_t v = 0; v < n; ++v) p *= scm.conditional(v, digits);
    probs[flat] = p;
    advance(digits, scm.cardinalities());
  }
  return ProbTable(std::move(vars), scm.cardinalities(), std::move(probs));
}

ProbTable do_distribution(const DiscreteScm& scm, NodeId t, std::size_t value, std::size_t cap) {
  const std::size_t n = scm.dag().size();
  if (t >= n) throw InvalidArgument("do_distribution: node id out of range");
  if (value >= scm.card(t)) {
    throw InvalidArgument("do_distribution: value " + std::to_string(value) + " outside the domain of '" +
                          scm.dag().name(t) + "'");
  }
  NodeSet vars;
  std::vector<std::size_t> cards;
  for (std::size_t v = 0; v < n; ++v) {
    if (v == t) continue;
    vars.push_back(v);
    cards.push_back(scm.card(v));
  }
  const std::size_t states = checked_product(cards);
  if (states > cap) {
    throw ResourceLimit("do_distribution: " + std::to_string(states) + " states exceed the cap of " +
                        std::to_string(cap));
  }
  std::vector<double> probs(states);
  std::vector<std::size_t> digits(vars.size(), 0);
  std::vector<std::size_t> full(n, 0);
  full[t] = value;
  for (std::size_t flat = 0; flat < states; ++flat) {
    for (std::size_t i = 0; i < vars.size(); ++i) full[vars[i]] = digits[i];
    double p = 1.0;
    for (NodeId v : vars) p *= scm.conditional(v, full);
    probs[flat] = p;
    advance(digits, cards);
  }
  return ProbTable(std::move(vars), std::move(cards), std::move(probs));
}

namespace {

struct AdjustView {
  ProbTable table;  // over z..., t, y
  std::size_t z_states;
  std::size_t t_card;
  std::size_t y_card;

  double p(std::size_t zi, std::size_t ti, std::size_t yi) const {
    return table.probs()[(zi * t_card + ti) * y_card + yi];
  }
  double p_tz(std::size_t zi, std::size_t ti) const {
    double s = 0.0;
    for (std::size_t k = 0; k < y_card; ++k) s += p(zi, ti, k);
    return s;
  }
  double p_z(std::size_t zi) const {
    double s = 0.0;
    for (std::size_t k = 0; k < t_card; ++k) s += p_tz(zi, k);
    return s;
  }
  double p_t(std::size_t ti) const {
    double s = 0.0;
    for (std::size_t zi = 0; zi < z_states; ++zi) s += p_tz(zi, ti);
    return s;
  }
  // Human-readable z configuration for error messages.
  std::string z_cell(std::size_t zi, std::size_t nz) const {
    ProbTable::Assignment a;
    auto states = table.decode((zi * t_card) * y_card);
    for (std::size_t k = 0; k < nz; ++k) a.emplace_back(table.vars()[k], states[k]);
    return cell_name(a);
  }
};

AdjustView make_view(const ProbTable& joint, const NodeSet& z, NodeId t, NodeId y, std::size_t t_val,
                     std::size_t y_val, const char* what) {
  if (t == y) throw InvalidArgument(std::string(what) + ": treatment and outcome must differ");
  for (NodeId v : z) {
    if (v == t || v == y) throw InvalidArgument(std::string(what) + ": set must not contain treatment or outcome");
  }
  NodeSet keep = z;
  keep.push_back(t);
  keep.push_back(y);
  ProbTable m = joint.marginal(keep);
  const std::size_t tc = m.cards()[z.size()];
  const std::size_t yc = m.cards()[z.size() + 1];
  if (t_val >= tc || y_val >= yc) throw InvalidArgument(std::string(what) + ": value outside domain");
  const std::size_t zs = m.size() / (tc * yc);
  return AdjustView{std::move(m), zs, tc, yc};
}

}  // namespace

double backdoor_adjust(const ProbTable& joint, const NodeSet& z, NodeId t, NodeId y, std::size_t t_val,
                       std::size_t y_val) {
  const AdjustView v = make_view(joint, z, t, y, t_val, y_val, "backdoor_adjust");
  double out = 0.0;
  for (std::size_t zi = 0; zi < v.z_states; ++zi) {
    const double pz = v.p_z(zi);
    if (pz == 0.0) continue;
    const double ptz = v.p_tz(zi, t_val);
    if (ptz == 0.0) {
      throw DegenerateInput("backdoor_adjust: P(t=" + std::to_string(t_val) + ", z=" + v.z_cell(zi, z.size()) +
                            ") is zero");
    }
    out += v.p(zi, t_val, y_val) / ptz * pz;
  }
  return out;
}

double frontdoor_adjust(const ProbTable& joint, const NodeSet& z, NodeId t, NodeId y, std::size_t t_val,
                        std::size_t y_val) {
  const AdjustView v = make_view(joint, z, t, y, t_val, y_val, "frontdoor_adjust");
  const double pt = v.p_t(t_val);
  if (pt == 0.0) throw DegenerateInput("frontdoor_adjust: P(t=" + std::to_string(t_val) + ") is zero");
  std::vector<double> pt_all(v.t_card);
  for (std::size_t k = 0; k < v.t_card; ++k) pt_all[k] = v.p_t(k);
  double out = 0.0;
  for (std::size_t zi = 0; zi < v.z_states; ++zi) {
    const double pz_given_t = v.p_tz(zi, t_val) / pt;
    if (pz_given_t == 0.0) continue;
    double inner = 0.0;
    for (std::size_t tp = 0; tp < v.t_card; ++tp) {
      if (pt_all[tp] == 0.0) continue;
      const double ptz = v.p_tz(zi, tp);
      if (ptz == 0.0) {
        throw DegenerateInput("frontdoor_adjust: P(t=" + std::to_string(tp) + ", z=" + v.z_cell(zi, z.size()) +
                              ") is zero");
      }
      inner += v.p(zi, tp, y_val) / ptz * pt_all[tp];
    }
    out += pz_given_t * inner;
  }
  return out;
}

double discrete_ate(const DiscreteScm& scm, NodeId t, NodeId y, std::size_t cap) {
  if (t >= scm.dag().size() || y >= scm.dag().size()) throw InvalidArgument("discrete_ate: node id out of range");
  if (t == y) throw InvalidArgument("discrete_ate: treatment and outcome must differ");
  if (scm.card(t) != 2) throw UnsupportedInput("discrete_ate: treatment '" + scm.dag().name(t) + "' is not binary");
  const auto yv = scm.values(y);
  double e[2] = {0.0, 0.0};
  for (std::size_t arm = 0; arm < 2; ++arm) {
    const ProbTable py = do_distribution(scm, t, arm, cap).marginal({y});
    for (std::size_t k = 0; k < yv.size(); ++k) e[arm] += yv[k] * py.probs()[k];
  }
  return e[1] - e[0];
}

namespace {
template <typename Adjust>
double adjusted_ate(const DiscreteScm& scm, NodeId t, NodeId y, Adjust&& adjust) {
  if (scm.card(t) != 2) throw UnsupportedInput("treatment '" + scm.dag().name(t) + "' is not binary");
  const auto yv = scm.values(y);
  double out = 0.0;
  for (std::size_t k = 0; k < yv.size(); ++k) out += yv[k] * (adjust(1, k) - adjust(0, k));
  return out;
}
}  // namespace

double backdoor_ate(const DiscreteScm& scm, const ProbTable& joint, const NodeSet& z, NodeId t, NodeId y) {
  return adjusted_ate(scm, t, y, [&](std::size_t tv, std::size_t yv) { return backdoor_adjust(joint, z, t, y, tv, yv); });
}

double frontdoor_ate(const DiscreteScm& scm, const ProbTable& joint, const NodeSet& z, NodeId t, NodeId y) {
  return adjusted_ate(scm, t, y, [&](std::size_t tv, std::size_t yv) { return frontdoor_adjust(joint, z, t, y, tv, yv); });
}

num::Tensor sample(const DiscreteScm& scm, std::size_t n, num::Pcg64& rng) {
  const std::size_t nodes = scm.dag().size();
  num::Tensor out(n, nodes);
  std::vector<std::size_t> state(nodes, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (NodeId v : scm.dag().topological_order()) {
      const std::size_t card = scm.card(v);
      const auto row = scm.cpt(v).subspan(scm.cpt_row(v, state) * card, card);
      const double u = rng.uniform();
      double acc = 0.0;
      std::size_t k = 0;
      for (; k + 1 < card; ++k) {
        acc += row[k];
        if (u < acc) break;
      }
      state[v] = k;
      out(r, v) = static_cast<double>(k);
    }
  }
  return out;
}

}  // namespace fdvae::graph
