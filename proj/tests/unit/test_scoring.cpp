#include <random>

#include "doctest.h"
#include "hoie/inference/mfvi.hpp"
#include "hoie/scoring/scorer.hpp"

using namespace hoie;
using namespace hoie::num;
using namespace hoie::scoring;
using schema::FactorCases;

namespace {

schema::LabelSchema test_schema() {
  return schema::LabelSchema::make({"Attack", "Move"}, {"PER", "ORG", "GPE"}, {"Attacker", "Target"},
                                   {"PER-SOC", "ORG-AFF"}, {"PER-SOC"});
}

ScoringConfig small_config(std::size_t d = 4) {
  ScoringConfig c;
  c.entity_hidden = c.trigger_hidden = c.relation_width = c.role_width = d;
  c.binary_head = c.binary_tail = c.binary_mid = d;
  c.ternary_head = c.ternary_tail = d;
  c.dropout = 0.0;
  return c;
}

FactorCases all_cases() {
  return {{BinaryCase::homo_i, BinaryCase::homo_ii, BinaryCase::hete_i}, {TernaryCase::hete_ii, TernaryCase::hete_iii}};
}

void zero_all(ParameterStore& store) {
  for (auto& p : store) std::fill(p->value.data().begin(), p->value.data().end(), 0.0);
}

Tensor randn(Shape s, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Tensor t(std::move(s));
  for (double& v : t.data()) v = n(rng);
  return t;
}

// 2 triggers + 3 entities with every candidate edge.
schema::InstanceGraph fixture_graph(const schema::LabelSchema& s) {
  schema::InstanceGraph g;
  g.id = "fx";
  for (int i = 0; i < 2; ++i) g.nodes.push_back({{i, i}, schema::NodeKind::trigger, 0});
  for (int i = 0; i < 3; ++i) g.nodes.push_back({{2 + i, 2 + i}, schema::NodeKind::entity, 0});
  g.edges = schema::candidate_edges(g.nodes, s);
  return g;
}

Tensor row(const Tensor& z, std::size_t r) {
  const std::size_t w = z.dim(1);
  return Tensor({w}, std::vector<double>(z.data().begin() + static_cast<long>(r * w), z.data().begin() + static_cast<long>((r + 1) * w)));
}

}  // namespace

TEST_CASE("unary node score examples") {
  auto s = test_schema();
  ParameterStore store(1);
  Scorers sc(small_config(), s, {}, 3, store);
  zero_all(store);
  store.get("unary.entity.l2.b").value = Tensor::vector({0.5, -1, 2});
  Graph g;
  CHECK(forward(sc.unary_node_scores(g, g.constant(Tensor::matrix(1, 3, {1, 2, 3})), schema::NodeKind::entity)) ==
        Tensor::matrix(1, 3, {0.5, -1, 2}));

  // 1-d linear case: score = 2 z
  auto one = schema::LabelSchema::make({"E"}, {"X"}, {}, {});
  ScoringConfig c = small_config(1);
  ParameterStore st(2);
  Scorers lin(c, one, {}, 1, st);
  zero_all(st);
  st.get("unary.entity.l1.w").value[0] = 1.0;
  st.get("unary.entity.l2.w").value[0] = 2.0;
  Graph g2;
  CHECK(forward(lin.unary_node_scores(g2, g2.constant(Tensor::matrix(1, 1, {3})), schema::NodeKind::entity)) ==
        Tensor::matrix(1, 1, {6}));
  CHECK_THROWS_AS(lin.unary_node_scores(g2, g2.constant(Tensor::matrix(1, 2, {3, 1})), schema::NodeKind::entity),
                  ShapeError);
}

TEST_CASE("unary edge score examples") {
  auto one = schema::LabelSchema::make({"E"}, {"X"}, {}, {"R"});
  ParameterStore st(3);
  Scorers sc(small_config(1), one, {}, 1, st);
  zero_all(st);
  st.get("unary.relation.e.b").value[0] = 3.0;
  st.get("unary.relation.H").value = Tensor::matrix(2, 1, {1, -1});
  Graph g;
  Var z = g.constant(Tensor::matrix(1, 1, {0.7}));
  // FNN-s output is zero: every label scores zero
  CHECK(forward(sc.unary_edge_scores(g, z, z, schema::EdgeTask::relation)) == Tensor::matrix(1, 2, {0, 0}));
  st.get("unary.relation.s.b").value[0] = 2.0;
  ++st.get("unary.relation.s.b").version;
  Graph g2;
  Var z2 = g2.constant(Tensor::matrix(1, 1, {0.7}));
  CHECK(forward(sc.unary_edge_scores(g2, z2, z2, schema::EdgeTask::relation)) == Tensor::matrix(1, 2, {6, -6}));
}

TEST_CASE("binary score examples") {
  auto s = test_schema();
  ParameterStore st(4);
  Scorers sc(small_config(1), s, {{BinaryCase::homo_i}, {}}, 1, st);
  zero_all(st);
  st.get("binary.sib.s.b").value[0] = 2.0;
  st.get("binary.sib.e.b").value[0] = 2.0;
  std::fill(st.get("binary.homo-i.sib.h").value.data().begin(), st.get("binary.homo-i.sib.h").value.data().end(), 1.0);
  Tensor z = Tensor::vector({0.3});
  CHECK(sc.binary_score(FactorType::sib, BinaryCase::homo_i, z, z, z, 1, 2) == 8.0);
  st.get("binary.sib.s.b").value[0] = 0.0;
  CHECK(sc.binary_score(FactorType::sib, BinaryCase::homo_i, z, z, z, 1, 2) == 0.0);
  CHECK_THROWS(sc.binary_score(FactorType::gp, BinaryCase::homo_i, z, z, z, 0, 0));
  CHECK_THROWS(sc.binary_score(FactorType::sib, BinaryCase::homo_i, z, z, z, 0, 3));
}

TEST_CASE("ternary score examples") {
  auto s = test_schema();
  ParameterStore st(5);
  Scorers sc(small_config(1), s, {{}, {TernaryCase::hete_iii}}, 1, st);
  zero_all(st);
  st.get("ternary.hete-iii.s.b").value[0] = 1.0;
  st.get("ternary.hete-iii.e.b").value[0] = 2.0;
  st.get("ternary.hete-iii.es").value[1] = 3.0;
  st.get("ternary.hete-iii.ee").value[2] = 1.0;
  st.get("ternary.hete-iii.h").value[0] = 1.0;
  Tensor z = Tensor::vector({0.0});
  CHECK(sc.ternary_score(TernaryCase::hete_iii, z, z, 1, 2, 0) == 6.0);
  CHECK(sc.ternary_score(TernaryCase::hete_iii, z, z, 0, 2, 0) == 0.0);
  CHECK_THROWS_AS(sc.ternary_score(TernaryCase::hete_iii, z, z, 3, 0, 0), std::out_of_range);
}

TEST_CASE("property: sib and cop scores are symmetric bitwise") {
  auto s = test_schema();
  std::mt19937_64 rng(6);
  for (bool share : {false, true}) {
    ParameterStore st(7);
    ScoringConfig c = small_config(5);
    c.share_labels = share;
    Scorers sc(c, s, all_cases(), 3, st);
    for (int trial = 0; trial < 30; ++trial) {
      Tensor zi = randn({3}, rng), zj = randn({3}, rng), zk = randn({3}, rng);
      for (BinaryCase k : {BinaryCase::homo_i, BinaryCase::homo_ii}) {
        const int r = k == BinaryCase::homo_i ? 3 : 3;
        const int m = static_cast<int>(rng() % r), n = static_cast<int>(rng() % r);
        CHECK(sc.binary_score(FactorType::sib, k, zi, zj, zk, m, n) == sc.binary_score(FactorType::sib, k, zi, zk, zj, n, m));
        CHECK(sc.binary_score(FactorType::cop, k, zi, zj, zk, m, n) == sc.binary_score(FactorType::cop, k, zj, zi, zk, n, m));
      }
    }
  }
}

TEST_CASE("batched blocks match single-factor scores") {
  auto s = test_schema();
  std::mt19937_64 rng(8);
  ParameterStore st(9);
  Scorers sc(small_config(4), s, all_cases(), 3, st);
  auto graph = fixture_graph(s);
  auto index = schema::enumerate_factors(graph.edges, sc.cases());
  Graph g;
  Tensor z = randn({5, 3}, rng);
  PotentialSet pot = materialize(sc.score(g, g.constant(z), graph, index));
  CHECK(pot.binary.size() == 7);
  CHECK(pot.ternary.size() == 2);
  const Layout& l = pot.layout;
  std::size_t checked = 0;
  for (const auto& b : pot.binary) {
    const std::size_t r1 = b.scores.dim(1), r2 = b.scores.dim(2);
    for (std::size_t f = 0; f < b.first.size(); ++f) {
      const auto& e1 = graph.edges[static_cast<std::size_t>(l.edges[task_slot(b.first_task)][static_cast<std::size_t>(b.first[f])])];
      const auto& e2 = graph.edges[static_cast<std::size_t>(l.edges[task_slot(b.second_task)][static_cast<std::size_t>(b.second[f])])];
      int i = e1.head, j = e1.tail, k = e2.tail;
      if (b.type == FactorType::cop) j = e2.head, k = e1.tail;
      for (std::size_t m = 0; m < r1; ++m)
        for (std::size_t n = 0; n < r2; ++n) {
          const double single = sc.binary_score(b.type, b.kind, row(z, static_cast<std::size_t>(i)),
                                                row(z, static_cast<std::size_t>(j)), row(z, static_cast<std::size_t>(k)),
                                                static_cast<int>(m), static_cast<int>(n));
          CHECK(b.scores[(f * r1 + m) * r2 + n] == doctest::Approx(single).epsilon(1e-12));
          ++checked;
        }
    }
  }
  for (const auto& b : pot.ternary) {
    const std::size_t ls = b.scores.dim(1), le = b.scores.dim(2), r = b.scores.dim(3);
    for (std::size_t f = 0; f < b.edges.size(); ++f) {
      const auto& e = graph.edges[static_cast<std::size_t>(l.edges[task_slot(b.task)][static_cast<std::size_t>(b.edges[f])])];
      for (std::size_t p = 0; p < ls; ++p)
        for (std::size_t q = 0; q < le; ++q)
          for (std::size_t m = 0; m < r; ++m) {
            const double single = sc.ternary_score(b.kind, row(z, static_cast<std::size_t>(e.head)),
                                                   row(z, static_cast<std::size_t>(e.tail)), static_cast<int>(p),
                                                   static_cast<int>(q), static_cast<int>(m));
            CHECK(b.scores[((f * ls + p) * le + q) * r + m] == doctest::Approx(single).epsilon(1e-12));
            ++checked;
          }
    }
  }
  CHECK(checked > 500);

  // zero high-order parameters: identically zero blocks
  for (auto& p : st)
    if (p->name.rfind("binary.", 0) == 0 || p->name.rfind("ternary.", 0) == 0)
      std::fill(p->value.data().begin(), p->value.data().end(), 0.0);
  Graph g2;
  PotentialSet zero = materialize(sc.score(g2, g2.constant(z), graph, index));
  for (const auto& b : zero.binary)
    for (double v : b.scores.data()) CHECK(v == 0.0);
  for (const auto& b : zero.ternary)
    for (double v : b.scores.data()) CHECK(v == 0.0);
}

TEST_CASE("without node reps the g vectors are ones") {
  auto s = test_schema();
  ParameterStore st(10);
  ScoringConfig c = small_config(3);
  c.node_reps = false;
  Scorers sc(c, s, all_cases(), 2, st);
  std::mt19937_64 rng(1);
  Tensor a = randn({2}, rng), b = randn({2}, rng), d = randn({2}, rng);
  // independent of the node inputs
  CHECK(sc.binary_score(FactorType::gp, BinaryCase::homo_ii, a, b, d, 1, 2) ==
        sc.binary_score(FactorType::gp, BinaryCase::homo_ii, d, a, b, 1, 2));
  const Tensor& h1 = st.get("binary.homo-ii.gp.h1").value;
  const Tensor& h2 = st.get("binary.homo-ii.gp.h2").value;
  double expect = 0;
  for (std::size_t x = 0; x < 3; ++x) expect += h1.at(1, x) * h2.at(2, x);
  CHECK(sc.binary_score(FactorType::gp, BinaryCase::homo_ii, a, b, d, 1, 2) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("shared label tables require equal widths") {
  auto s = test_schema();
  ParameterStore st(11);
  ScoringConfig c = small_config(4);
  c.share_labels = true;
  c.role_width = 6;
  CHECK_THROWS_AS(Scorers(c, s, {{BinaryCase::homo_i}, {}}, 3, st), std::invalid_argument);
  ScoringConfig bad = small_config(4);
  bad.binary_mid = 5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("scorer gradients match finite differences") {
  auto s = test_schema();
  std::mt19937_64 rng(12);
  ParameterStore st(13);
  ScoringConfig c = small_config(2);
  c.dropout = 0.3;
  Scorers sc(c, s, all_cases(), 2, st);
  auto graph = fixture_graph(s);
  graph.nodes.resize(4);  // keep the check small: 2 triggers, 2 entities
  graph.edges = schema::candidate_edges(graph.nodes, s);
  auto index = schema::enumerate_factors(graph.edges, sc.cases());
  Tensor z = randn({4, 2}, rng);
  std::vector<Tensor> weights;
  auto build = [&](Graph& g) {
    PotentialVars p = sc.score(g, g.constant(z), graph, index);
    std::vector<Var> all;
    for (auto& v : p.node_unary) all.push_back(v);
    for (auto& v : p.edge_unary) all.push_back(v);
    for (auto& b : p.binary) all.push_back(b.scores);
    for (auto& b : p.ternary) all.push_back(dense_scores(b));
    std::mt19937_64 wr(99);
    Var total = g.scalar(0.0);
    for (Var v : all) total = add(total, sum_all(mul(v, g.constant(randn(v.shape(), wr)))));
    return total;
  };
  auto res = check_gradients(st, build, 1e-5, RunMode::train, 4);
  CHECK(res.max_rel_error <= 1e-4);
  CHECK(res.checked == st.scalar_count());
}

TEST_CASE("factored ternary messages match the dense tensor route") {
  auto s = test_schema();
  std::mt19937_64 rng(21);
  ParameterStore st(22);
  Scorers sc(small_config(5), s, {{}, {TernaryCase::hete_ii, TernaryCase::hete_iii}}, 3, st);
  auto graph = fixture_graph(s);
  auto index = schema::enumerate_factors(graph.edges, sc.cases());
  Graph g;
  PotentialVars factored = sc.score(g, g.constant(randn({5, 3}, rng)), graph, index);
  for (const auto& b : factored.ternary) {
    CHECK_FALSE(b.scores.valid());
    CHECK(b.factors[0].valid());
  }
  PotentialVars dense = bind(g, materialize(factored));

  infer::PosteriorVars q;
  for (std::size_t k = 0; k < 2; ++k) {
    q.node[k] = softmax(g.constant(randn(factored.node_unary[k].shape(), rng)));
    q.edge[k] = softmax(g.constant(randn(factored.edge_unary[k].shape(), rng)));
  }
  auto a = infer::ternary_messages(q, factored);
  auto b = infer::ternary_messages(q, dense);
  auto close = [](Var x, Var y) {
    REQUIRE(x.valid() == y.valid());
    if (!x.valid()) return;
    REQUIRE(x.shape() == y.shape());
    for (std::size_t i = 0; i < x.value().size(); ++i) CHECK(x.value()[i] == doctest::Approx(y.value()[i]).epsilon(1e-12));
  };
  for (std::size_t k = 0; k < 2; ++k) {
    close(a.edge[k], b.edge[k]);
    close(a.node_head[k], b.node_head[k]);
    close(a.node_tail[k], b.node_tail[k]);
  }

  for (auto mode : {infer::ScheduleMode::synchronous, infer::ScheduleMode::asynchronous}) {
    auto alphas = infer::constant_alphas(g, {});
    auto qa = infer::values(infer::run_mfvi(factored, {3, mode}, alphas));
    auto qb = infer::values(infer::run_mfvi(dense, {3, mode}, alphas));
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t i = 0; i < qa.edge[k].size(); ++i) CHECK(qa.edge[k][i] == doctest::Approx(qb.edge[k][i]).epsilon(1e-12));
  }
}
