#include <algorithm>
#include <random>
#include <stdexcept>
#include <set>
#include <tuple>

#include "doctest.h"
#include "hoie/schema/factors.hpp"

using namespace hoie::schema;

namespace {

LabelSchema small_schema() { return LabelSchema::make({"Attack"}, {"PER", "ORG"}, {"Attacker"}, {"PER-SOC"}); }

std::vector<NodeInstance> nodes_of(int triggers, int entities) {
  std::vector<NodeInstance> nodes;
  for (int i = 0; i < triggers; ++i) nodes.push_back({{i, i}, NodeKind::trigger, 0});
  for (int i = 0; i < entities; ++i) nodes.push_back({{triggers + i, triggers + i}, NodeKind::entity, 0});
  return nodes;
}

std::size_t count_task(const std::vector<EdgeInstance>& edges, EdgeTask t) {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [t](const auto& e) { return e.task == t; }));
}

}  // namespace

TEST_CASE("label sets") {
  auto s = small_schema();
  CHECK(s.role.name(0) == "NULL");
  CHECK(s.relation.name(0) == "NULL");
  CHECK(s.role.has_null());
  CHECK_FALSE(s.event.has_null());
  CHECK(s.entity.id("ORG") == 1);
  CHECK_THROWS(s.entity.id("GPE"));
  CHECK_THROWS(LabelSet({"A", "A"}));
}

TEST_CASE("candidate edges examples") {
  auto s = small_schema();
  auto e = candidate_edges(nodes_of(1, 2), s);
  CHECK(count_task(e, EdgeTask::role) == 2);
  CHECK(count_task(e, EdgeTask::relation) == 2);
  e = candidate_edges(nodes_of(0, 3), s);
  CHECK(count_task(e, EdgeTask::role) == 0);
  CHECK(count_task(e, EdgeTask::relation) == 6);
  CHECK(candidate_edges(nodes_of(1, 0), s).empty());
}

TEST_CASE("candidate edges are ordered, directed and self-loop free") {
  auto s = small_schema();
  auto e = candidate_edges(nodes_of(2, 3), s);
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(std::tie(e[i - 1].head, e[i - 1].tail) < std::tie(e[i].head, e[i].tail));
  std::set<std::pair<int, int>> rel;
  for (const auto& x : e) {
    CHECK(x.head != x.tail);
    if (x.task == EdgeTask::relation) rel.insert({x.head, x.tail});
    if (x.task == EdgeTask::role) CHECK(x.head < 2);
  }
  for (auto [h, t] : rel) CHECK(rel.count({t, h}) == 1);
}

TEST_CASE("binary factor examples") {
  // three role edges sharing one trigger
  std::vector<EdgeInstance> roles = {{0, 1, EdgeTask::role, 0}, {0, 2, EdgeTask::role, 0}, {0, 3, EdgeTask::role, 0}};
  auto f = enumerate_binary_factors(roles, BinaryCase::homo_i);
  CHECK(f.count(FactorType::sib) == 3);
  CHECK(f.count(FactorType::cop) == 0);
  CHECK(f.count(FactorType::gp) == 0);

  std::vector<EdgeInstance> chain = {{1, 2, EdgeTask::relation, 0}, {2, 3, EdgeTask::relation, 0}};
  f = enumerate_binary_factors(chain, BinaryCase::homo_ii);
  CHECK(f.count(FactorType::gp) == 1);
  CHECK(f.count(FactorType::sib) == 0);
  CHECK(f.count(FactorType::cop) == 0);
  CHECK(f.binary[0].first == 0);
  CHECK(f.binary[0].second == 1);

  std::vector<EdgeInstance> mixed = {{0, 2, EdgeTask::role, 0}, {1, 2, EdgeTask::relation, 0}};
  f = enumerate_binary_factors(mixed, BinaryCase::hete_i);
  CHECK(f.count(FactorType::cop) == 1);
  CHECK(f.count(FactorType::gp) == 0);
  CHECK(f.count(FactorType::sib) == 0);
}

TEST_CASE("ternary factor examples") {
  auto s = small_schema();
  auto e = candidate_edges(nodes_of(1, 2), s);
  CHECK(enumerate_ternary_factors(e, TernaryCase::hete_ii).ternary.size() == 2);
  e = candidate_edges(nodes_of(0, 3), s);
  auto t = enumerate_ternary_factors(e, TernaryCase::hete_iii);
  CHECK(t.ternary.size() == 6);
  for (const auto& f : t.ternary) {
    CHECK(e[static_cast<std::size_t>(f.edge)].head == f.head);
    CHECK(e[static_cast<std::size_t>(f.edge)].tail == f.tail);
  }
  CHECK(enumerate_ternary_factors({}, TernaryCase::hete_ii).ternary.empty());
}

TEST_CASE("unknown case tags") {
  CHECK(parse_binary_case("homo-ii") == BinaryCase::homo_ii);
  CHECK(parse_ternary_case("hete-iii") == TernaryCase::hete_iii);
  CHECK_THROWS_AS(parse_binary_case("homo-iv"), std::invalid_argument);
  CHECK_THROWS_AS(parse_ternary_case("hete-i"), std::invalid_argument);
}

// Independent enumeration: every ordered pair of distinct edges, classified
// by the definitions, deduplicated as unordered pairs for sib and cop.
TEST_CASE("property: factor enumeration matches brute-force classification") {
  std::mt19937_64 rng(3);
  auto s = small_schema();
  for (int trial = 0; trial < 40; ++trial) {
    auto nodes = nodes_of(static_cast<int>(rng() % 3), static_cast<int>(rng() % 5));
    std::shuffle(nodes.begin(), nodes.end(), rng);
    auto e = candidate_edges(nodes, s);
    for (BinaryCase c : kBinaryCases) {
      std::multiset<std::tuple<int, int, int>> expect, got;
      for (int a = 0; a < static_cast<int>(e.size()); ++a)
        for (int b = 0; b < static_cast<int>(e.size()); ++b) {
          if (a == b) continue;
          const auto& x = e[static_cast<std::size_t>(a)];
          const auto& y = e[static_cast<std::size_t>(b)];
          bool same_task = x.task == y.task;
          bool homo = (c == BinaryCase::homo_i && same_task && x.task == EdgeTask::role) ||
                      (c == BinaryCase::homo_ii && same_task && x.task == EdgeTask::relation);
          bool hete = c == BinaryCase::hete_i && x.task == EdgeTask::role && y.task == EdgeTask::relation;
          if (homo && a < b && x.head == y.head) expect.insert({0, a, b});
          if ((homo && a < b && x.tail == y.tail) || (hete && x.tail == y.tail)) expect.insert({1, a, b});
          bool gp_ok = c != BinaryCase::homo_i && (homo || hete);
          if (gp_ok && x.tail == y.head && y.tail != x.head) expect.insert({2, a, b});
        }
      for (const auto& f : enumerate_binary_factors(e, c).binary) {
        got.insert({static_cast<int>(f.type), f.first, f.second});
        const auto& x = e[static_cast<std::size_t>(f.first)];
        const auto& y = e[static_cast<std::size_t>(f.second)];
        if (f.type == FactorType::sib) CHECK(x.head == y.head);
        if (f.type == FactorType::cop) CHECK(x.tail == y.tail);
        if (f.type == FactorType::gp) CHECK(x.tail == y.head);
        CHECK(f.first != f.second);
      }
      CHECK(got == expect);
    }
  }
}
