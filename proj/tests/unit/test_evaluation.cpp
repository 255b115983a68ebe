#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "hoie/evaluation/metrics.hpp"

using namespace hoie;
using namespace hoie::eval;
using schema::EdgeTask;
using schema::InstanceGraph;
using schema::NodeKind;

namespace {

schema::LabelSchema test_schema() {
  return schema::LabelSchema::make({"Attack", "Move"}, {"PER", "ORG", "GPE"}, {"Attacker", "Target"},
                                   {"PER-SOC", "ORG-AFF"}, {"PER-SOC"});
}

InstanceGraph entities(std::vector<std::pair<int, int>> spans_and_types) {
  InstanceGraph g;
  g.id = "s";
  for (auto [pos, type] : spans_and_types) g.nodes.push_back({{pos, pos}, NodeKind::entity, type});
  return g;
}

// Parses "gold,predicted,a,b,delta" rows into (gold, predicted) -> delta.
std::map<std::pair<std::string, std::string>, long> deltas(const std::string& csv) {
  std::map<std::pair<std::string, std::string>, long> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "gold,predicted,a,b,delta");
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    REQUIRE(f.size() == 5);
    CHECK(std::stol(f[4]) == std::stol(f[3]) - std::stol(f[2]));
    out[{f[0], f[1]}] = std::stol(f[4]);
  }
  return out;
}

InstanceGraph random_graph(std::mt19937_64& rng, const std::string& id) {
  InstanceGraph g;
  g.id = id;
  const int nt = static_cast<int>(rng() % 3), ne = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < nt; ++i) g.nodes.push_back({{static_cast<int>(rng() % 6), 0}, NodeKind::trigger, static_cast<int>(rng() % 2)});
  for (int i = 0; i < ne; ++i) g.nodes.push_back({{static_cast<int>(rng() % 6), 0}, NodeKind::entity, static_cast<int>(rng() % 3)});
  for (auto& n : g.nodes) n.span.end = n.span.start + static_cast<int>(rng() % 2);
  g.edges = schema::candidate_edges(g.nodes, test_schema());
  for (auto& e : g.edges) e.label = rng() % 3 == 0 ? 1 + static_cast<int>(rng() % 2) : 0;
  return g;
}

}  // namespace

TEST_CASE("perfect predictions score 1 everywhere") {
  std::mt19937_64 rng(1);
  std::vector<InstanceGraph> gold;
  for (int i = 0; i < 20; ++i) gold.push_back(random_graph(rng, "s" + std::to_string(i)));
  auto r = score_corpus(gold, gold, test_schema());
  for (Metric m : kMetrics)
    if (r[m].gold > 0) CHECK(r[m].f1() == 1.0);
}

TEST_CASE("empty predictions give zero precision, recall and F1") {
  auto gold = entities({{0, 0}, {1, 1}});
  auto pred = entities({});
  auto r = score_sentence(pred, gold, test_schema());
  CHECK(r[Metric::ent].precision() == 0.0);
  CHECK(r[Metric::ent].recall() == 0.0);
  CHECK(r[Metric::ent].f1() == 0.0);
}

TEST_CASE("four gold, three predicted, two correct entities") {
  auto gold = entities({{0, 0}, {1, 1}, {2, 2}, {3, 0}});
  auto pred = entities({{0, 0}, {1, 1}, {2, 0}});
  auto r = score_corpus({pred}, {gold}, test_schema());
  CHECK(r[Metric::ent].tp == 2);
  CHECK(r[Metric::ent].precision() == 2.0 / 3.0);
  CHECK(r[Metric::ent].recall() == 0.5);
  CHECK(r[Metric::ent].f1() == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("each gold item is matched at most once") {
  auto gold = entities({{0, 0}});
  auto pred = entities({{0, 0}, {0, 0}});
  auto r = score_sentence(pred, gold, test_schema());
  CHECK(r[Metric::ent].tp == 1);
  CHECK(r[Metric::ent].predicted == 2);
}

TEST_CASE("relation and argument criteria") {
  auto s = test_schema();
  InstanceGraph gold;
  gold.id = "s";
  gold.nodes = {{{0, 0}, NodeKind::trigger, 0}, {{1, 1}, NodeKind::entity, 0}, {{2, 3}, NodeKind::entity, 0}};
  gold.edges = schema::candidate_edges(gold.nodes, s);
  auto set_label = [](InstanceGraph& g, int h, int t, int label) {
    for (auto& e : g.edges)
      if (e.head == h && e.tail == t) e.label = label;
  };
  for (auto& e : gold.edges) e.label = 0;
  set_label(gold, 0, 1, 1);  // Attacker
  set_label(gold, 1, 2, 1);  // PER-SOC (symmetric)

  SUBCASE("symmetric relation predicted in both directions counts once") {
    auto pred = gold;
    set_label(pred, 2, 1, 1);
    auto r = score_sentence(pred, gold, s);
    CHECK(r[Metric::rel].predicted == 1);
    CHECK(r[Metric::rel].tp == 1);
  }
  SUBCASE("symmetric relation predicted reversed matches") {
    auto pred = gold;
    set_label(pred, 1, 2, 0);
    set_label(pred, 2, 1, 1);
    CHECK(score_sentence(pred, gold, s)[Metric::rel].tp == 1);
  }
  SUBCASE("wrong entity type keeps Rel but loses Rel+ and Ent") {
    auto pred = gold;
    pred.nodes[2].label = 1;
    auto r = score_sentence(pred, gold, s);
    CHECK(r[Metric::rel].tp == 1);
    CHECK(r[Metric::rel_plus].tp == 0);
    CHECK(r[Metric::ent].tp == 1);
  }
  SUBCASE("wrong role keeps Arg-I only; wrong event type loses both") {
    auto pred = gold;
    set_label(pred, 0, 1, 2);
    auto r = score_sentence(pred, gold, s);
    CHECK(r[Metric::arg_i].tp == 1);
    CHECK(r[Metric::arg_c].tp == 0);
    pred = gold;
    pred.nodes[0].label = 1;
    r = score_sentence(pred, gold, s);
    CHECK(r[Metric::trig_i].tp == 1);
    CHECK(r[Metric::trig_c].tp == 0);
    CHECK(r[Metric::arg_i].tp == 0);
  }
}

TEST_CASE("id mismatch is rejected") {
  auto a = entities({});
  auto b = entities({});
  b.id = "other";
  CHECK_THROWS_AS(score_sentence(a, b, test_schema()), std::invalid_argument);
  CHECK_THROWS_AS(score_corpus({a}, {}, test_schema()), std::invalid_argument);
}

TEST_CASE("subset invariants, permutation invariance and JSON on random corpora") {
  std::mt19937_64 rng(2);
  auto s = test_schema();
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<InstanceGraph> pred, gold;
    for (int i = 0; i < 5; ++i) {
      gold.push_back(random_graph(rng, "s" + std::to_string(i)));
      pred.push_back(random_graph(rng, "s" + std::to_string(i)));
    }
    auto r = score_corpus(pred, gold, s);
    CHECK(r[Metric::rel_plus].tp <= r[Metric::rel].tp);
    CHECK(r[Metric::arg_c].tp <= r[Metric::arg_i].tp);
    CHECK(r[Metric::trig_c].tp <= r[Metric::trig_i].tp);
    for (Metric m : kMetrics) CHECK(r[m].tp <= std::min(r[m].predicted, r[m].gold));

    std::vector<std::size_t> order{0, 1, 2, 3, 4};
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<InstanceGraph> p2, g2;
    for (auto i : order) {
      p2.push_back(pred[i]);
      g2.push_back(gold[i]);
      std::reverse(p2.back().edges.begin(), p2.back().edges.end());
    }
    CHECK(score_corpus(p2, g2, s).counts[6].tp == r.counts[6].tp);
    CHECK(score_corpus(p2, g2, s).to_json() == r.to_json());
  }
}

TEST_CASE("adding a correct prediction never lowers a TP count") {
  auto gold = entities({{0, 0}, {1, 1}});
  auto pred = entities({{0, 1}});
  auto before = score_sentence(pred, gold, test_schema());
  pred.nodes.push_back({{1, 1}, NodeKind::entity, 1});
  auto after = score_sentence(pred, gold, test_schema());
  for (Metric m : kMetrics) CHECK(after[m].tp >= before[m].tp);
  CHECK(after[Metric::ent].tp == before[Metric::ent].tp + 1);
}

TEST_CASE("error matrix") {
  auto s = test_schema();
  InstanceGraph gold;
  gold.id = "s";
  gold.nodes = {{{0, 0}, NodeKind::entity, 0}, {{1, 1}, NodeKind::entity, 0}};
  gold.edges = schema::candidate_edges(gold.nodes, s);
  gold.edges[0].label = 1;  // PER-SOC 0 -> 1
  gold.edges[1].label = 0;
  auto a = gold;
  a.edges[0].label = 0;  // missed
  auto b = gold;

  SUBCASE("identical systems give an all-zero table") {
    for (auto& [cell, d] : deltas(error_matrix({a}, {a}, {gold}, s, ErrorTask::relation))) CHECK(d == 0);
  }
  SUBCASE("b fixes a NULL error of a") {
    auto d = deltas(error_matrix({a}, {b}, {gold}, s, ErrorTask::relation));
    CHECK(d.at({"PER-SOC", "PER-SOC"}) == 1);
    CHECK(d.at({"PER-SOC", "NULL"}) == -1);
    CHECK(d.count({"NULL", "NULL"}) == 0);
  }
  SUBCASE("row sums over gold labels are preserved") {
    std::mt19937_64 rng(3);
    std::vector<InstanceGraph> g, pa, pb;
    for (int i = 0; i < 30; ++i) {
      g.push_back(random_graph(rng, std::to_string(i)));
      pa.push_back(g.back());
      pb.push_back(g.back());
      for (auto& n : pa.back().nodes) n.label = static_cast<int>(rng() % (n.kind == NodeKind::entity ? 3 : 2));
      for (auto& n : pb.back().nodes) n.label = static_cast<int>(rng() % (n.kind == NodeKind::entity ? 3 : 2));
    }
    std::map<std::string, long> rows;
    for (auto& [cell, d] : deltas(error_matrix(pa, pb, g, s, ErrorTask::entity)))
      if (cell.first != "NULL") rows[cell.first] += d;
    for (auto& [label, sum] : rows) CHECK(sum == 0);
  }
  CHECK_THROWS_AS(parse_error_task("bogus"), std::invalid_argument);
}
