#pragma once
// Graphical identification checks. All of them read structure only.

#include "fdvae/graph/dag.hpp"

namespace fdvae::graph {

// True iff every path between a node of `a` and a node of `b` is blocked by
// `z` (chain/fork with the middle node in z, or a collider with neither it
// nor any descendant in z). a and b must be nonempty; a, b, z pairwise
// disjoint.
bool d_separated(const Dag& dag, const NodeSet& a, const NodeSet& b, const NodeSet& z);

// (1) no member of z descends from t; (2) z blocks every t-y path that
// starts with an arrow into t.
bool is_valid_backdoor_set(const Dag& dag, const NodeSet& z, NodeId t, NodeId y);

// (1) z intercepts every directed path t -> y; (2) no unblocked back-door
// path from t to z; (3) t blocks every back-door path from z to y.
bool is_valid_frontdoor_set(const Dag& dag, const NodeSet& z, NodeId t, NodeId y);

struct FrontdoorVerdict {
  bool intercepts_directed_paths = false;
  bool no_backdoor_treatment_to_set = false;
  bool set_to_outcome_blocked_by_treatment = false;
  bool valid() const noexcept {
    return intercepts_directed_paths && no_backdoor_treatment_to_set && set_to_outcome_blocked_by_treatment;
  }
};

// Same check with each condition reported separately.
FrontdoorVerdict check_frontdoor(const Dag& dag, const NodeSet& z, NodeId t, NodeId y);

}  // namespace fdvae::graph
