#include "hoie/inference/oracle.hpp"

#include <cmath>

namespace hoie::infer {

schema::LabelSchema random_schema() { return schema::LabelSchema::make({"Attack"}, {"PER"}, {"Agent"}, {"ORG-AFF"}, {}); }

schema::InstanceGraph random_graph(const RandomGraphSpec& spec) {
  schema::InstanceGraph g;
  g.id = "rand";
  int pos = 0;
  for (int i = 0; i < spec.triggers; ++i, ++pos) g.nodes.push_back({{pos, pos}, schema::NodeKind::trigger, 0});
  for (int i = 0; i < spec.entities; ++i, ++pos) g.nodes.push_back({{pos, pos}, schema::NodeKind::entity, 0});
  g.tokens.assign(static_cast<std::size_t>(pos), "w");
  g.edges = schema::candidate_edges(g.nodes, random_schema());
  return g;
}

num::Tensor random_tensor(num::Shape s, double scale, Rng& rng) {
  std::normal_distribution<double> n(0.0, scale);
  num::Tensor t(std::move(s));
  for (double& v : t.data()) v = n(rng);
  return t;
}

PotentialSet random_potentials(const RandomGraphSpec& spec, Rng& rng) {
  auto graph = random_graph(spec);
  PotentialSet pot;
  pot.layout = scoring::make_layout(graph);
  const std::array<std::size_t, 2> nl{spec.trigger_labels, spec.entity_labels};
  const std::array<std::size_t, 2> el{spec.role_labels, spec.relation_labels};
  for (std::size_t s = 0; s < 2; ++s) {
    pot.node_unary[s] = random_tensor({pot.layout.nodes[s].size(), nl[s]}, spec.unary_scale, rng);
    pot.edge_unary[s] = random_tensor({pot.layout.edges[s].size(), el[s]}, spec.unary_scale, rng);
  }
  scoring::add_factor_blocks(pot, graph, schema::enumerate_factors(graph.edges, spec.cases));
  for (auto& b : pot.binary) {
    b.scores = random_tensor({b.first.size(), el[scoring::task_slot(b.first_task)], el[scoring::task_slot(b.second_task)]},
                             spec.scale, rng);
  }
  for (auto& b : pot.ternary) {
    const auto hs = scoring::kind_slot(scoring::Layout::head_kind(b.task));
    b.scores = random_tensor({b.edges.size(), nl[hs], nl[1], el[scoring::task_slot(b.task)]}, spec.scale, rng);
  }
  return pot;
}

RandomGraphSpec small_graph_spec(Rng& rng, double scale) {
  // (triggers, entities) with at most 6 candidate edges
  static constexpr int kShapes[][2] = {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {0, 2}, {0, 3}};
  const auto& shape = kShapes[rng() % std::size(kShapes)];
  RandomGraphSpec s;
  s.triggers = shape[0];
  s.entities = shape[1];
  s.trigger_labels = 2 + rng() % 2;
  s.entity_labels = 2 + rng() % 2;
  s.role_labels = 2 + rng() % 2;
  s.relation_labels = 2 + rng() % 2;
  s.scale = scale;
  return s;
}

MfviOracleReport mfvi_oracle(std::uint64_t seed, std::size_t graphs, double scale, const Schedule& schedule,
                             const AlphaConfig& alphas) {
  Rng rng(derive_seed(seed, "mfvi-oracle"));
  MfviOracleReport r;
  double total = 0.0;
  for (std::size_t k = 0; k < graphs; ++k) {
    const auto pot = random_potentials(small_graph_spec(rng, scale), rng);
    num::Graph g;
    const auto q = values(run_mfvi(scoring::bind(g, pot), schedule, constant_alphas(g, alphas)));
    const auto exact = exact_marginals(pot, alphas);
    const auto got = decode(q);
    const auto map = exact_map(pot, alphas);
    auto compare = [&](const num::Tensor& a, const num::Tensor& b, const std::vector<int>& la,
                       const std::vector<int>& lb) {
      for (std::size_t i = 0; i < a.dim(0); ++i) {
        double l1 = 0.0;
        for (std::size_t j = 0; j < a.dim(1); ++j) l1 += std::abs(a.at(i, j) - b.at(i, j));
        total += l1;
        r.max_l1_gap = std::max(r.max_l1_gap, l1);
        r.variables += 1;
        r.map_matches += la[i] == lb[i];
      }
    };
    for (std::size_t s = 0; s < 2; ++s) {
      compare(q.node[s], exact.node[s], got.node[s], map.node[s]);
      compare(q.edge[s], exact.edge[s], got.edge[s], map.edge[s]);
    }
    r.graphs += 1;
  }
  r.mean_l1_gap = r.variables == 0 ? 0.0 : total / static_cast<double>(r.variables);
  return r;
}

}  // namespace hoie::infer
