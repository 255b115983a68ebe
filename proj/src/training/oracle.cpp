#include "hoie/training/oracle.hpp"

#include "hoie/numerics/rng.hpp"

namespace hoie::train {

schema::LabelSchema oracle_schema() {
  return schema::LabelSchema::make({"Attack", "Move"}, {"PER", "ORG"}, {"Agent", "Target"}, {"PER-SOC", "ORG-AFF"},
                                   {"PER-SOC"});
}

LabeledSentence oracle_sentence(std::uint64_t seed, int entities) {
  Rng rng(derive_seed(seed, "oracle-sentence"));
  LabeledSentence s;
  s.graph.id = "oracle-" + std::to_string(seed);
  const int n = 2 + 2 * entities;
  for (int i = 0; i < n; ++i) {
    s.input.ids.push_back(2 + static_cast<int>(rng() % 10));
    s.graph.tokens.push_back("t" + std::to_string(s.input.ids.back()));
  }
  s.input.id = s.graph.id;
  s.graph.nodes.push_back({{0, 0}, schema::NodeKind::trigger, static_cast<int>(rng() % 2)});
  for (int e = 0; e < entities; ++e)
    s.graph.nodes.push_back({{1 + 2 * e, 2 + 2 * e}, schema::NodeKind::entity, static_cast<int>(rng() % 2)});
  s.graph.edges = schema::candidate_edges(s.graph.nodes, oracle_schema());
  for (auto& e : s.graph.edges) e.label = static_cast<int>(rng() % 3);
  return s;
}

LabelerConfig oracle_config(int iterations, AlphaMode mode, std::size_t d) {
  LabelerConfig c;
  c.encoder.vocab_size = 12;
  c.encoder.width = d;
  auto& s = c.scoring;
  s.entity_hidden = s.trigger_hidden = s.relation_width = s.role_width = d;
  s.binary_head = s.binary_tail = s.binary_mid = d;
  s.ternary_head = s.ternary_tail = d;
  s.dropout = 0.3;
  c.cases = {{schema::BinaryCase::homo_i, schema::BinaryCase::homo_ii, schema::BinaryCase::hete_i},
             {schema::TernaryCase::hete_ii, schema::TernaryCase::hete_iii}};
  c.schedule.iterations = iterations;
  c.alpha_mode = mode;
  return c;
}

num::GradCheckResult labeler_gradient_check(int iterations, AlphaMode mode, std::uint64_t seed) {
  num::ParameterStore store(seed);
  Labeler model(oracle_config(iterations, mode), oracle_schema(), store);
  const auto s = oracle_sentence(seed);
  return num::check_gradients(
      store, [&](num::Graph& g) { return model.loss(g, s, LossMode::high_order).total; }, 1e-5, num::RunMode::train,
      derive_seed(seed, "dropout"));
}

}  // namespace hoie::train
