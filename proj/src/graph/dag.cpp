#include "fdvae/graph/dag.hpp"

#include <algorithm>
#include <array>
#include <deque>

#include "fdvae/error.hpp"

namespace fdvae::graph {

namespace {
constexpr std::array<std::pair<Role, std::string_view>, 10> kRoleNames{{
    {Role::none, "none"},
    {Role::treatment, "treatment"},
    {Role::outcome, "outcome"},
    {Role::unobserved_confounder, "unobserved_confounder"},
    {Role::front_door, "front_door"},
    {Role::confounder_t, "confounder_t"},
    {Role::confounder_ty, "confounder_ty"},
    {Role::confounder_y, "confounder_y"},
    {Role::external, "external"},
    {Role::proxy, "proxy"},
}};
}  // namespace

std::string_view to_string(Role r) {
  for (const auto& [role, name] : kRoleNames) {
    if (role == r) return name;
  }
  return "none";
}

Role role_from_string(std::string_view s) {
  for (const auto& [role, name] : kRoleNames) {
    if (name == s) return role;
  }
  throw InvalidArgument("unknown node role '" + std::string(s) + "'");
}

Dag::Dag(std::vector<Node> nodes, std::vector<Edge> edges) : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  const std::size_t n = nodes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes_[i].name.empty()) throw InvalidArgument("dag: node " + std::to_string(i) + " has an empty name");
    for (std::size_t j = 0; j < i; ++j) {
      if (nodes_[i].name == nodes_[j].name) throw InvalidArgument("dag: duplicate node name '" + nodes_[i].name + "'");
    }
  }
  std::size_t treatments = 0, outcomes = 0;
  for (const auto& nd : nodes_) {
    treatments += nd.role == Role::treatment;
    outcomes += nd.role == Role::outcome;
  }
  if (treatments > 1 || outcomes > 1) throw InvalidArgument("dag: at most one treatment and one outcome node");

  parents_.assign(n, {});
  children_.assign(n, {});
  for (const auto& [a, b] : edges_) {
    if (a >= n || b >= n) throw InvalidArgument("dag: edge endpoint out of range");
    if (a == b) throw InvalidArgument("dag: self-loop on '" + nodes_[a].name + "'");
    if (std::find(children_[a].begin(), children_[a].end(), b) != children_[a].end()) {
      throw InvalidArgument("dag: duplicate edge " + nodes_[a].name + " -> " + nodes_[b].name);
    }
    children_[a].push_back(b);
    parents_[b].push_back(a);
  }
  for (auto& p : parents_) std::sort(p.begin(), p.end());
  for (auto& c : children_) std::sort(c.begin(), c.end());

  // Kahn's algorithm, smallest id first for a stable order.
  std::vector<std::size_t> indeg(n);
  for (std::size_t v = 0; v < n; ++v) indeg[v] = parents_[v].size();
  std::vector<NodeId> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indeg[v] == 0) ready.push_back(v);
  }
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end(), std::greater<>());
    const NodeId v = ready.back();
    ready.pop_back();
    topo_.push_back(v);
    for (NodeId c : children_[v]) {
      if (--indeg[c] == 0) ready.push_back(c);
    }
  }
  if (topo_.size() != n) throw InvalidArgument("dag: graph contains a directed cycle");
}

Dag Dag::from_names(std::vector<Node> nodes, const std::vector<std::pair<std::string, std::string>>& edges) {
  std::vector<Edge> ids;
  ids.reserve(edges.size());
  auto lookup = [&](const std::string& name) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].name == name) return i;
    }
    throw InvalidArgument("dag: edge references unknown node '" + name + "'");
  };
  for (const auto& [a, b] : edges) ids.emplace_back(lookup(a), lookup(b));
  return Dag(std::move(nodes), std::move(ids));
}

NodeId Dag::id(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  throw InvalidArgument("unknown node '" + std::string(name) + "'");
}

NodeSet Dag::ids(const std::vector<std::string>& names) const {
  NodeSet out;
  out.reserve(names.size());
  for (const auto& nm : names) out.push_back(id(nm));
  return out;
}

std::optional<NodeId> Dag::find_role(Role r) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].role == r) return i;
  }
  return std::nullopt;
}

bool Dag::has_edge(NodeId from, NodeId to) const {
  const auto& c = children_.at(from);
  return std::binary_search(c.begin(), c.end(), to);
}

std::vector<bool> Dag::descendants(const NodeSet& seeds) const {
  std::vector<bool> mark(size(), false);
  std::deque<NodeId> q;
  for (NodeId s : seeds) {
    if (s >= size()) throw InvalidArgument("dag: node id out of range");
    if (!mark[s]) {
      mark[s] = true;
      q.push_back(s);
    }
  }
  while (!q.empty()) {
    const NodeId v = q.front();
    q.pop_front();
    for (NodeId c : children_[v]) {
      if (!mark[c]) {
        mark[c] = true;
        q.push_back(c);
      }
    }
  }
  return mark;
}

std::vector<bool> Dag::ancestors(const NodeSet& seeds) const {
  std::vector<bool> mark(size(), false);
  std::deque<NodeId> q;
  for (NodeId s : seeds) {
    if (s >= size()) throw InvalidArgument("dag: node id out of range");
    if (!mark[s]) {
      mark[s] = true;
      q.push_back(s);
    }
  }
  while (!q.empty()) {
    const NodeId v = q.front();
    q.pop_front();
    for (NodeId p : parents_[v]) {
      if (!mark[p]) {
        mark[p] = true;
        q.push_back(p);
      }
    }
  }
  return mark;
}

Dag Dag::without_outgoing(const NodeSet& from) const {
  std::vector<bool> cut(size(), false);
  for (NodeId v : from) cut.at(v) = true;
  std::vector<Edge> kept;
  for (const auto& e : edges_) {
    if (!cut[e.first]) kept.push_back(e);
  }
  return Dag(nodes_, std::move(kept));
}

}  // namespace fdvae::graph
