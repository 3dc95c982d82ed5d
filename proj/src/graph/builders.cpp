#include "fdvae/graph/builders.hpp"

#include <numeric>

#include "fdvae/error.hpp"

namespace fdvae::graph {

Dag proxy_frontdoor_dag() {
  std::vector<Dag::Node> nodes{
      {"T", Role::treatment},       {"Y", Role::outcome},        {"U", Role::unobserved_confounder},
      {"Z_FD", Role::front_door},   {"W_T", Role::confounder_t}, {"W_TY", Role::confounder_ty},
      {"W_Y", Role::confounder_y},  {"W_E", Role::external},     {"X", Role::proxy},
  };
  return Dag::from_names(std::move(nodes), {
                                               {"W_T", "T"},
                                               {"W_TY", "T"},
                                               {"W_TY", "Y"},
                                               {"W_Y", "Y"},
                                               {"U", "T"},
                                               {"U", "Y"},
                                               {"T", "Z_FD"},
                                               {"Z_FD", "Y"},
                                               {"Z_FD", "X"},
                                               {"W_T", "X"},
                                               {"W_TY", "X"},
                                               {"W_Y", "X"},
                                               {"W_E", "X"},
                                           });
}

Dag random_dag(std::size_t n, double edge_prob, num::Pcg64& rng) {
  std::vector<Dag::Node> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({"V" + std::to_string(i), Role::none});
  std::vector<Dag::Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(edge_prob)) edges.emplace_back(i, j);
    }
  }
  return Dag(std::move(nodes), std::move(edges));
}

DiscreteScm random_binary_scm(const Dag& dag, num::Pcg64& rng, double lo, double hi) {
  std::vector<std::size_t> cards(dag.size(), 2);
  std::vector<std::vector<double>> cpts(dag.size());
  for (std::size_t v = 0; v < dag.size(); ++v) {
    const std::size_t rows = std::size_t{1} << dag.parents(v).size();
    for (std::size_t r = 0; r < rows; ++r) {
      const double p1 = rng.uniform(lo, hi);
      cpts[v].push_back(1.0 - p1);
      cpts[v].push_back(p1);
    }
  }
  return DiscreteScm(dag, std::move(cards), std::move(cpts));
}

namespace {

struct Parsed {
  Dag dag;
  std::vector<std::vector<double>> domains;
};

Parsed parse(const nlohmann::json& doc) {
  try {
    std::vector<Dag::Node> nodes;
    std::vector<std::vector<double>> domains;
    for (const auto& nd : doc.at("nodes")) {
      Dag::Node node;
      node.name = nd.at("name").get<std::string>();
      if (nd.contains("role") && !nd.at("role").is_null()) node.role = role_from_string(nd.at("role").get<std::string>());
      std::vector<double> dom{0.0, 1.0};
      if (nd.contains("domain")) dom = nd.at("domain").get<std::vector<double>>();
      if (dom.size() < 2) throw InvalidArgument("node '" + node.name + "': domain needs at least 2 values");
      nodes.push_back(std::move(node));
      domains.push_back(std::move(dom));
    }
    std::vector<std::pair<std::string, std::string>> edges;
    if (doc.contains("edges")) {
      for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw DataError("edge entries must be [parent, child] pairs");
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
      }
    }
    return {Dag::from_names(std::move(nodes), edges), std::move(domains)};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("graph document: ") + e.what());
  }
}

}  // namespace

Dag dag_from_json(const nlohmann::json& doc) { return parse(doc).dag; }

DiscreteScm scm_from_json(const nlohmann::json& doc) {
  Parsed p = parse(doc);
  if (!doc.contains("cpts")) throw DataError("graph document has no 'cpts'");
  std::vector<std::size_t> cards;
  std::vector<std::vector<double>> cpts;
  try {
    const auto& c = doc.at("cpts");
    for (std::size_t v = 0; v < p.dag.size(); ++v) {
      cards.push_back(p.domains[v].size());
      if (!c.contains(p.dag.name(v))) throw DataError("missing cpt for node '" + p.dag.name(v) + "'");
      cpts.push_back(c.at(p.dag.name(v)).get<std::vector<double>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("graph document: ") + e.what());
  }
  return DiscreteScm(std::move(p.dag), std::move(cards), std::move(cpts), std::move(p.domains));
}

nlohmann::json to_json(const Dag& dag) {
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array();
  for (std::size_t v = 0; v < dag.size(); ++v) {
    doc["nodes"].push_back({{"name", dag.name(v)}, {"role", std::string(to_string(dag.role(v)))}});
  }
  doc["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : dag.edges()) doc["edges"].push_back({dag.name(a), dag.name(b)});
  return doc;
}

nlohmann::json to_json(const DiscreteScm& scm) {
  nlohmann::json doc = to_json(scm.dag());
  for (std::size_t v = 0; v < scm.dag().size(); ++v) {
    const auto vals = scm.values(v);
    doc["nodes"][v]["domain"] = std::vector<double>(vals.begin(), vals.end());
    const auto c = scm.cpt(v);
    doc["cpts"][scm.dag().name(v)] = std::vector<double>(c.begin(), c.end());
  }
  return doc;
}

}  // namespace fdvae::graph
