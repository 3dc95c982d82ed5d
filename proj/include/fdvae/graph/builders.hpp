#pragma once
// Canonical graphs, random graph/SCM generators and JSON interchange.
//
// Interchange document:
//   {
//     "nodes": [ {"name": "T", "role": "treatment", "domain": [0, 1]}, ... ],
//     "edges": [ ["W", "T"], ... ],
//     "cpts":  { "T": [row-major probabilities], ... }      (optional)
//   }
// "domain" lists the real value each state encodes; omitted means [0, 1].

#include <json.hpp>

#include "fdvae/graph/dag.hpp"
#include "fdvae/graph/scm.hpp"
#include "fdvae/numerics/rng.hpp"

namespace fdvae::graph {

// The proxy front-door graph: T, Y, hidden U (T <- U -> Y), mediator Z_FD,
// confounders W_T, W_TY, W_Y, external W_E, and proxy X which is a child of
// Z_FD and every W.
Dag proxy_frontdoor_dag();

// Ids follow a random topological order; each forward pair gets an edge
// with probability edge_prob. Names are V0, V1, ...
Dag random_dag(std::size_t n, double edge_prob, num::Pcg64& rng);

// Binary CPTs with every P(v=1 | pa) drawn uniformly from [lo, hi].
DiscreteScm random_binary_scm(const Dag& dag, num::Pcg64& rng, double lo = 0.1, double hi = 0.9);

Dag dag_from_json(const nlohmann::json& doc);
// Requires "cpts" for every node.
DiscreteScm scm_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Dag& dag);
nlohmann::json to_json(const DiscreteScm& scm);

}  // namespace fdvae::graph
