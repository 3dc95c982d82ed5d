#pragma once
// Discrete structural causal models and exact probability tables.
//
// CPT layout: node v with parents p_1 < p_2 < ... (ascending id) stores one
// row per parent configuration, rows ordered in mixed radix with p_1 the
// most significant digit; each row holds card(v) probabilities.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fdvae/graph/dag.hpp"
#include "fdvae/numerics/rng.hpp"
#include "fdvae/numerics/tensor.hpp"

namespace fdvae::graph {

inline constexpr std::size_t kDefaultStateCap = std::size_t{1} << 20;

class DiscreteScm {
 public:
  // `values[v]` maps each state index of v to the real number it encodes
  // (used for expectations). Empty means state index i encodes i.
  DiscreteScm(Dag dag, std::vector<std::size_t> cardinalities, std::vector<std::vector<double>> cpts,
              std::vector<std::vector<double>> values = {});

  const Dag& dag() const noexcept { return dag_; }
  std::size_t card(NodeId v) const { return card_.at(v); }
  const std::vector<std::size_t>& cardinalities() const noexcept { return card_; }
  std::span<const double> cpt(NodeId v) const { return cpts_.at(v); }
  std::span<const double> values(NodeId v) const { return values_.at(v); }

  // Row of cpt(v) selected by the parent states in a full assignment.
  std::size_t cpt_row(NodeId v, std::span<const std::size_t> assignment) const;
  double conditional(NodeId v, std::span<const std::size_t> assignment) const;

  // Number of joint states; saturates at SIZE_MAX.
  std::size_t state_count() const;

 private:
  Dag dag_;
  std::vector<std::size_t> card_;
  std::vector<std::vector<double>> cpts_;
  std::vector<std::vector<double>> values_;
};

// Dense table over `vars` (mixed radix, first variable most significant).
class ProbTable {
 public:
  using Assignment = std::vector<std::pair<NodeId, std::size_t>>;

  ProbTable(std::vector<NodeId> vars, std::vector<std::size_t> cards, std::vector<double> probs);

  const std::vector<NodeId>& vars() const noexcept { return vars_; }
  const std::vector<std::size_t>& cards() const noexcept { return cards_; }
  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double total() const;

  bool contains(NodeId v) const;
  std::size_t card_of(NodeId v) const;
  // Decodes a flat index into one state per variable (in vars() order).
  std::vector<std::size_t> decode(std::size_t index) const;
  double at(std::span<const std::size_t> states) const;

  // Marginal over `keep` (in the order given).
  ProbTable marginal(const NodeSet& keep) const;
  // Probability of a partial assignment; unlisted variables are summed out.
  double prob(const Assignment& event) const;

 private:
  std::vector<NodeId> vars_;
  std::vector<std::size_t> cards_;
  std::vector<double> probs_;
};

// ResourceLimit if the state space exceeds `cap`.
ProbTable joint_distribution(const DiscreteScm& scm, std::size_t cap = kDefaultStateCap);

// Truncated factorization: P(t|pa(t)) removed, t clamped. The returned
// table ranges over every node except t.
ProbTable do_distribution(const DiscreteScm& scm, NodeId t, std::size_t value, std::size_t cap = kDefaultStateCap);

// sum_z P(y|t,z) P(z).
double backdoor_adjust(const ProbTable& joint, const NodeSet& z, NodeId t, NodeId y, std::size_t t_val,
                       std::size_t y_val);

// sum_z P(z|t) sum_t' P(y|t',z) P(t').
double frontdoor_adjust(const ProbTable& joint, const NodeSet& z, NodeId t, NodeId y, std::size_t t_val,
                        std::size_t y_val);

// E[Y|do(T=1)] - E[Y|do(T=0)] with Y's value coding. t must be binary.
double discrete_ate(const DiscreteScm& scm, NodeId t, NodeId y, std::size_t cap = kDefaultStateCap);

// The same contrast through the adjustment formulas on an observational joint.
double backdoor_ate(const DiscreteScm& scm, const ProbTable& joint, const NodeSet& z, NodeId t, NodeId y);
double frontdoor_ate(const DiscreteScm& scm, const ProbTable& joint, const NodeSet& z, NodeId t, NodeId y);

// Ancestral sampling; returns n x size() state indices stored as doubles.
num::Tensor sample(const DiscreteScm& scm, std::size_t n, num::Pcg64& rng);

}  // namespace fdvae::graph
