#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fdvae::graph {

using NodeId = std::size_t;
using NodeSet = std::vector<NodeId>;

// Advisory metadata only: no criterion check reads roles.
enum class Role {
  none,
  treatment,
  outcome,
  unobserved_confounder,
  front_door,
  confounder_t,
  confounder_ty,
  confounder_y,
  external,
  proxy,
};

std::string_view to_string(Role r);
Role role_from_string(std::string_view s);

// Immutable directed acyclic graph. Construction validates node names,
// edge endpoints, self-loops, duplicate edges, acyclicity and the
// single-treatment/single-outcome role rule (InvalidArgument otherwise).
class Dag {
 public:
  struct Node {
    std::string name;
    Role role = Role::none;
  };
  using Edge = std::pair<NodeId, NodeId>;

  Dag() = default;
  Dag(std::vector<Node> nodes, std::vector<Edge> edges);
  static Dag from_names(std::vector<Node> nodes,
                        const std::vector<std::pair<std::string, std::string>>& edges);

  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(NodeId v) const { return nodes_.at(v); }
  const std::string& name(NodeId v) const { return nodes_.at(v).name; }
  Role role(NodeId v) const { return nodes_.at(v).role; }
  // Throws InvalidArgument for unknown names.
  NodeId id(std::string_view name) const;
  NodeSet ids(const std::vector<std::string>& names) const;
  std::optional<NodeId> find_role(Role r) const;

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const NodeSet& parents(NodeId v) const { return parents_.at(v); }
  const NodeSet& children(NodeId v) const { return children_.at(v); }
  bool has_edge(NodeId from, NodeId to) const;
  const NodeSet& topological_order() const noexcept { return topo_; }

  // Membership masks; each includes the seed nodes themselves.
  std::vector<bool> descendants(const NodeSet& seeds) const;
  std::vector<bool> ancestors(const NodeSet& seeds) const;

  // Copy with every edge leaving a node of `from` deleted.
  Dag without_outgoing(const NodeSet& from) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<NodeSet> parents_;
  std::vector<NodeSet> children_;
  NodeSet topo_;
};

}  // namespace fdvae::graph
