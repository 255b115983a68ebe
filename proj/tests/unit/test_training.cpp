#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "hoie/training/checkpoint.hpp"
#include "hoie/training/trainer.hpp"

using namespace hoie;
using namespace hoie::num;
using namespace hoie::train;
using schema::BinaryCase;
using schema::InstanceGraph;
using schema::NodeKind;
using schema::TernaryCase;

namespace {

schema::LabelSchema test_schema() {
  return schema::LabelSchema::make({"Attack", "Move"}, {"PER", "ORG"}, {"Agent", "Target"}, {"PER-SOC", "ORG-AFF"},
                                   {"PER-SOC"});
}

LabelerConfig small_config(schema::FactorCases cases, std::size_t d = 4) {
  LabelerConfig c;
  c.encoder.vocab_size = 12;
  c.encoder.width = d;
  auto& s = c.scoring;
  s.entity_hidden = s.trigger_hidden = s.relation_width = s.role_width = d;
  s.binary_head = s.binary_tail = s.binary_mid = d;
  s.ternary_head = s.ternary_tail = d;
  s.dropout = 0.0;
  c.cases = std::move(cases);
  return c;
}

schema::FactorCases all_cases() {
  return {{BinaryCase::homo_i, BinaryCase::homo_ii, BinaryCase::hete_i}, {TernaryCase::hete_ii, TernaryCase::hete_iii}};
}

// Trigger at 0, entities at 1 and 2..3; gold labels planted from `seed`.
LabeledSentence fixture(std::uint64_t seed, int entities = 2) {
  std::mt19937_64 rng(seed);
  LabeledSentence s;
  s.graph.id = "fx" + std::to_string(seed);
  const int n = 2 + 2 * entities;
  for (int i = 0; i < n; ++i) {
    s.input.ids.push_back(2 + static_cast<int>(rng() % 10));
    s.graph.tokens.push_back("t" + std::to_string(s.input.ids.back()));
  }
  s.input.id = s.graph.id;
  s.graph.nodes.push_back({{0, 0}, NodeKind::trigger, static_cast<int>(rng() % 2)});
  for (int e = 0; e < entities; ++e)
    s.graph.nodes.push_back({{1 + 2 * e, 2 + 2 * e}, NodeKind::entity, static_cast<int>(rng() % 2)});
  s.graph.edges = schema::candidate_edges(s.graph.nodes, test_schema());
  for (auto& e : s.graph.edges) e.label = static_cast<int>(rng() % 3);
  return s;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("joint loss closed forms") {
  Graph g;
  scoring::Layout layout;
  InstanceGraph gold;
  gold.nodes = {{{0, 0}, NodeKind::entity, 2}, {{1, 1}, NodeKind::entity, 0}};
  gold.edges = {{0, 1, schema::EdgeTask::relation, 3}};
  layout.nodes[1] = {0, 1};
  layout.edges[1] = {0};
  infer::PosteriorVars q;
  q.node_logits[0] = g.constant(Tensor({0, 3}));
  q.edge_logits[0] = g.constant(Tensor({0, 4}));
  q.node_logits[1] = g.constant(Tensor({2, 3}));
  q.edge_logits[1] = g.constant(Tensor({1, 4}));
  auto l = joint_loss(q, gold, layout);
  CHECK(l.total.value()[0] == doctest::Approx(2 * std::log(3.0) + std::log(4.0)).epsilon(1e-14));
  CHECK(l.parts[1].value()[0] + l.parts[3].value()[0] == doctest::Approx(l.total.value()[0]));

  q.node_logits[1] = g.constant(Tensor({2, 3}, {0, 0, 1000, 1000, 0, 0}));
  q.edge_logits[1] = g.constant(Tensor({1, 4}, {0, 0, 0, 1000}));
  CHECK(joint_loss(q, gold, layout).total.value()[0] == 0.0);

  gold.nodes[0].label = schema::kUnknownLabel;  // skipped
  CHECK(joint_loss(q, gold, layout).total.value()[0] == 0.0);
  gold.edges[0].label = schema::kUnknownLabel;
  CHECK_THROWS_AS(joint_loss(q, gold, layout), std::invalid_argument);
}

TEST_CASE("full-model gradients through unfolded MFVI match finite differences") {
  for (int t : {1, 2}) {
    for (auto mode : {AlphaMode::fixed, AlphaMode::learned}) {
      ParameterStore store(7);
      auto cfg = small_config(all_cases());
      cfg.schedule.iterations = t;
      cfg.alpha_mode = mode;
      cfg.scoring.dropout = 0.3;
      Labeler model(cfg, test_schema(), store);
      auto s = fixture(3);
      auto r = check_gradients(
          store, [&](Graph& g) { return model.loss(g, s).total; }, 1e-5, RunMode::train, 11);
      CAPTURE(t);
      CAPTURE(r.worst);
      CHECK(r.max_rel_error < 1e-4);
      CHECK(r.checked == store.scalar_count());
    }
  }
}

TEST_CASE("all-zero alphas reproduce first-order loss and decode bitwise") {
  ParameterStore store(8);
  auto cfg = small_config(all_cases());
  cfg.alphas = infer::AlphaConfig::zeros();
  cfg.schedule.iterations = 3;
  Labeler model(cfg, test_schema(), store);
  for (std::uint64_t k = 0; k < 10; ++k) {
    auto s = fixture(100 + k, 1 + static_cast<int>(k % 3));
    Graph g1, g2;
    const double hi = model.loss(g1, s, LossMode::high_order).total.value()[0];
    const double lo = model.loss(g2, s, LossMode::first_order).total.value()[0];
    CHECK(same_bits(hi, lo));
    auto a = model.predict(s.input, s.graph, LossMode::high_order);
    auto b = model.first_order_predict(s.input, s.graph);
    for (std::size_t i = 0; i < a.nodes.size(); ++i) CHECK(a.nodes[i].label == b.nodes[i].label);
    for (std::size_t i = 0; i < a.edges.size(); ++i) CHECK(a.edges[i].label == b.edges[i].label);
  }
}

TEST_CASE("zero scorer weights decode to label 0 everywhere") {
  ParameterStore store(9);
  Labeler model(small_config({}), test_schema(), store);
  for (auto& p : store) std::fill(p->value.data().begin(), p->value.data().end(), 0.0);
  auto s = fixture(4);
  auto out = model.first_order_predict(s.input, s.graph);
  for (const auto& n : out.nodes) CHECK(n.label == 0);
  for (const auto& e : out.edges) CHECK(e.label == 0);
}

TEST_CASE("loss and decode read the same posteriors") {
  ParameterStore store(10);
  Labeler model(small_config(all_cases()), test_schema(), store);
  auto s = fixture(5);
  Graph g;
  auto pot = model.potentials(g, s.input, s.graph);
  auto q = infer::values(model.posteriors(g, pot, LossMode::high_order));
  auto x = infer::decode(q);
  auto graph = s.graph;
  apply_assignment(graph, pot.layout, x);
  auto pred = model.predict(s.input, s.graph);
  for (std::size_t i = 0; i < graph.edges.size(); ++i) CHECK(graph.edges[i].label == pred.edges[i].label);
}

TEST_CASE("training is deterministic given the seed") {
  std::vector<LabeledSentence> data;
  for (std::uint64_t k = 0; k < 6; ++k) data.push_back(fixture(20 + k));
  auto run = [&] {
    auto store = std::make_unique<ParameterStore>(3);
    auto cfg = small_config({{BinaryCase::homo_i}, {TernaryCase::hete_ii}});
    cfg.scoring.dropout = 0.2;
    Labeler model(cfg, test_schema(), *store);
    TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 4;
    tc.warmup_epochs = 1;
    tc.seed = 5;
    train_labeler(model, *store, data, data, tc);
    return store;
  };
  auto a = run();
  auto b = run();
  for (std::size_t i = 0; i < a->size(); ++i) {
    auto x = (*a)[i].value.data();
    auto y = (*b)[i].value.data();
    CHECK(std::equal(x.begin(), x.end(), y.begin()));
  }
}

TEST_CASE("overfits a five-sentence fixture") {
  std::vector<LabeledSentence> data;
  for (std::uint64_t k = 0; k < 5; ++k) data.push_back(fixture(40 + k));
  ParameterStore store(2);
  auto cfg = small_config({{BinaryCase::homo_i, BinaryCase::hete_i}, {TernaryCase::hete_iii}}, 8);
  Labeler model(cfg, test_schema(), store);
  TrainConfig tc;
  tc.batch_size = 5;
  tc.warmup_epochs = 0;
  tc.epochs = 200;
  tc.optimizer.encoder = {1e-2, 0.0};
  tc.optimizer.other = {1e-2, 0.0};
  std::vector<double> losses;
  fit(store, data.size(), [&](Graph& g, std::size_t i) { return model.loss(g, data[i]); }, tc, {},
      [&](const EpochLog& log) { losses.push_back(log.loss.total); });
  REQUIRE(losses.size() == 200);
  CHECK(losses.back() < losses.front());
  Graph g;
  double final = 0.0;
  for (const auto& s : data) final += model.loss(g, s).total.value()[0];
  CHECK(final < 0.05);
}

TEST_CASE("clipping bounds the applied gradient norm") {
  ParameterStore store(4);
  Labeler model(small_config({{BinaryCase::homo_i}, {}}), test_schema(), store);
  std::vector<LabeledSentence> data{fixture(60), fixture(61)};
  AdamWConfig oc;
  oc.clip = 0.05;
  AdamW opt(store, oc);
  auto r = train_step(store, opt, [&](Graph& g, std::size_t i) { return model.loss(g, data[i]); }, {0, 1}, 1);
  CHECK(r.grad_norm > oc.clip);
  CHECK(opt.applied_norm() <= oc.clip * (1 + 1e-12));
  CHECK(r.total == doctest::Approx(r.components[0] + r.components[1] + r.components[2] + r.components[3]));
}

TEST_CASE("train config validation and empty data") {
  TrainConfig tc;
  tc.optimizer.clip = 0;
  CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
  ParameterStore store;
  CHECK_THROWS_AS(fit(store, 0, {}, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("learned alphas stay inside (0, 1)") {
  ParameterStore store(5);
  auto cfg = small_config(all_cases());
  cfg.alpha_mode = AlphaMode::learned;
  Labeler model(cfg, test_schema(), store);
  store.get("label.alpha").value[0] = 40.0;
  store.get("label.alpha").value[1] = -40.0;
  auto a = model.alpha_values();
  for (double x : a.a) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  CHECK(a[3] == doctest::Approx(0.95));
}

TEST_CASE("gold transfer onto identified spans") {
  auto s = test_schema();
  auto gold = fixture(70);
  ident::IdentifiedSpans spans;
  spans.triggers = {{{0, 0}, 1}};
  spans.entities = {{{1, 2}, 0}, {{5, 5}, 1}};
  auto g = identified_graph(spans, gold.graph.id, gold.graph.tokens, s);
  REQUIRE(g.nodes.size() == 3);
  transfer_gold(g, gold.graph);
  CHECK(g.nodes[0].label == gold.graph.nodes[0].label);
  CHECK(g.nodes[1].label == gold.graph.nodes[1].label);
  CHECK(g.nodes[2].label == schema::kUnknownLabel);
  for (const auto& e : g.edges) {
    if (e.head == 2 || e.tail == 2) {
      CHECK(e.label == 0);
    } else {
      for (const auto& ge : gold.graph.edges)
        if (ge.head == e.head && ge.tail == e.tail) CHECK(e.label == ge.label);
    }
  }
}

TEST_CASE("checkpoint round trip") {
  auto dir = std::filesystem::temp_directory_path() / "hoie_ckpt_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model").string();
  ParameterStore a(1), b(2);
  Labeler ma(small_config(all_cases()), test_schema(), a);
  Labeler mb(small_config(all_cases()), test_schema(), b);
  save_checkpoint(path, a, R"({"note": "x"})", 42);
  auto info = load_checkpoint(path, b);
  CHECK(info.seed == 42);
  CHECK(info.config_json == R"({"note":"x"})");
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto x = a[i].value.data();
    auto y = b[i].value.data();
    CHECK(std::equal(x.begin(), x.end(), y.begin()));
  }
  ParameterStore c(3);
  Labeler mc(small_config(all_cases(), 6), test_schema(), c);
  CHECK_THROWS_AS(load_checkpoint(path, c), std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint((dir / "missing").string(), c), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("identifier training improves span F1") {
  auto s = test_schema();
  std::vector<LabeledSentence> data;
  for (std::uint64_t k = 0; k < 8; ++k) data.push_back(fixture(80 + k));
  ParameterStore store(6);
  ident::IdentifierConfig ic;
  ic.encoder.vocab_size = 12;
  ic.encoder.width = 8;
  ic.dropout = 0.0;
  ident::Identifier id(ic, s, store);
  const double before = identifier_f1(id, data, s);
  TrainConfig tc;
  tc.epochs = 60;
  tc.batch_size = 4;
  tc.warmup_epochs = 0;
  tc.optimizer.encoder = {2e-2, 0.0};
  tc.optimizer.other = {2e-2, 0.0};
  auto r = train_identifier(id, store, data, data, tc, s);
  CHECK(r.best_dev > before);
  CHECK(identifier_f1(id, data, s) == doctest::Approx(r.best_dev));
}
