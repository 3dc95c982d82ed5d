#include "fdvae/graph/criteria.hpp"

#include <array>
#include <deque>

#include "fdvae/error.hpp"

namespace fdvae::graph {

namespace {

std::vector<bool> membership(const Dag& dag, const NodeSet& s, const char* what) {
  std::vector<bool> m(dag.size(), false);
  for (NodeId v : s) {
    if (v >= dag.size()) throw InvalidArgument(std::string(what) + ": node id out of range");
    m[v] = true;
  }
  return m;
}

void check_endpoints(const Dag& dag, const NodeSet& z, NodeId t, NodeId y, const char* what) {
  if (t >= dag.size() || y >= dag.size()) throw InvalidArgument(std::string(what) + ": node id out of range");
  if (t == y) throw InvalidArgument(std::string(what) + ": treatment and outcome must differ");
  for (NodeId v : z) {
    if (v >= dag.size()) throw InvalidArgument(std::string(what) + ": node id out of range");
    if (v == t || v == y) throw InvalidArgument(std::string(what) + ": set must not contain treatment or outcome");
  }
}

// Nodes reachable from `src` along directed edges without entering `blocked`.
bool directed_reachable(const Dag& dag, NodeId src, NodeId dst, const std::vector<bool>& blocked) {
  std::vector<bool> seen(dag.size(), false);
  std::deque<NodeId> q{src};
  seen[src] = true;
  while (!q.empty()) {
    const NodeId v = q.front();
    q.pop_front();
    if (v == dst) return true;
    for (NodeId c : dag.children(v)) {
      if (!seen[c] && !blocked[c]) {
        seen[c] = true;
        q.push_back(c);
      }
    }
  }
  return false;
}

}  // namespace

bool d_separated(const Dag& dag, const NodeSet& a, const NodeSet& b, const NodeSet& z) {
  if (a.empty() || b.empty()) throw InvalidArgument("d_separated: endpoint sets must be nonempty");
  const auto in_a = membership(dag, a, "d_separated");
  const auto in_b = membership(dag, b, "d_separated");
  const auto in_z = membership(dag, z, "d_separated");
  for (std::size_t v = 0; v < dag.size(); ++v) {
    if ((in_a[v] && in_b[v]) || (in_a[v] && in_z[v]) || (in_b[v] && in_z[v])) {
      throw InvalidArgument("d_separated: sets must be pairwise disjoint ('" + dag.name(v) + "')");
    }
  }
  const auto anc_z = dag.ancestors(z);

  // Reachability over (node, direction). `up` means the ball arrived from a
  // child, `down` from a parent.
  enum Dir : unsigned { up = 0, down = 1 };
  std::vector<std::array<bool, 2>> visited(dag.size(), {false, false});
  std::deque<std::pair<NodeId, Dir>> q;
  for (NodeId s : a) q.emplace_back(s, up);
  while (!q.empty()) {
    auto [v, d] = q.front();
    q.pop_front();
    if (visited[v][d]) continue;
    visited[v][d] = true;
    if (!in_z[v] && in_b[v]) return false;
    if (d == up) {
      if (in_z[v]) continue;
      for (NodeId p : dag.parents(v)) q.emplace_back(p, up);
      for (NodeId c : dag.children(v)) q.emplace_back(c, down);
    } else {
      if (!in_z[v]) {
        for (NodeId c : dag.children(v)) q.emplace_back(c, down);
      }
      if (anc_z[v]) {
        for (NodeId p : dag.parents(v)) q.emplace_back(p, up);
      }
    }
  }
  return true;
}

bool is_valid_backdoor_set(const Dag& dag, const NodeSet& z, NodeId t, NodeId y) {
  check_endpoints(dag, z, t, y, "is_valid_backdoor_set");
  const auto desc = dag.descendants({t});
  for (NodeId v : z) {
    if (desc[v]) return false;
  }
  return d_separated(dag.without_outgoing({t}), {t}, {y}, z);
}

FrontdoorVerdict check_frontdoor(const Dag& dag, const NodeSet& z, NodeId t, NodeId y) {
  check_endpoints(dag, z, t, y, "is_valid_frontdoor_set");
  FrontdoorVerdict out;
  const auto in_z = membership(dag, z, "is_valid_frontdoor_set");
  out.intercepts_directed_paths = !directed_reachable(dag, t, y, in_z);
  if (z.empty()) {
    out.no_backdoor_treatment_to_set = true;
    out.set_to_outcome_blocked_by_treatment = true;
    return out;
  }
  out.no_backdoor_treatment_to_set = d_separated(dag.without_outgoing({t}), {t}, z, {});
  out.set_to_outcome_blocked_by_treatment = d_separated(dag.without_outgoing(z), z, {y}, {t});
  return out;
}

bool is_valid_frontdoor_set(const Dag& dag, const NodeSet& z, NodeId t, NodeId y) {
  return check_frontdoor(dag, z, t, y).valid();
}

}  // namespace fdvae::graph
