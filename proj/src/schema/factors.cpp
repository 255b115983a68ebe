#include "hoie/schema/factors.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hoie::schema {

const char* to_string(FactorType t) {
  switch (t) {
    case FactorType::sib: return "sib";
    case FactorType::cop: return "cop";
    case FactorType::gp: return "gp";
  }
  return "?";
}

const char* to_string(BinaryCase c) {
  switch (c) {
    case BinaryCase::homo_i: return "homo-i";
    case BinaryCase::homo_ii: return "homo-ii";
    case BinaryCase::hete_i: return "hete-i";
  }
  return "?";
}

const char* to_string(TernaryCase c) { return c == TernaryCase::hete_ii ? "hete-ii" : "hete-iii"; }

BinaryCase parse_binary_case(std::string_view tag) {
  for (BinaryCase c : kBinaryCases)
    if (tag == to_string(c)) return c;
  throw std::invalid_argument("unknown binary factor case '" + std::string(tag) + "'");
}

TernaryCase parse_ternary_case(std::string_view tag) {
  for (TernaryCase c : kTernaryCases)
    if (tag == to_string(c)) return c;
  throw std::invalid_argument("unknown ternary factor case '" + std::string(tag) + "'");
}

bool binary_allows(BinaryCase c, FactorType t) {
  switch (c) {
    case BinaryCase::homo_i: return t != FactorType::gp;
    case BinaryCase::homo_ii: return true;
    case BinaryCase::hete_i: return t != FactorType::sib;
  }
  return false;
}

EdgeTask ternary_task(TernaryCase c) { return c == TernaryCase::hete_ii ? EdgeTask::role : EdgeTask::relation; }

std::size_t FactorIndex::count(FactorType t) const {
  return static_cast<std::size_t>(
      std::count_if(binary.begin(), binary.end(), [t](const BinaryFactor& f) { return f.type == t; }));
}

void FactorIndex::merge(const FactorIndex& other) {
  binary.insert(binary.end(), other.binary.begin(), other.binary.end());
  ternary.insert(ternary.end(), other.ternary.begin(), other.ternary.end());
}

namespace {

// Pairs of distinct edges within one task (homo cases).
void homo_pairs(const std::vector<EdgeInstance>& edges, EdgeTask task, BinaryCase kind, FactorIndex& out) {
  const int n = static_cast<int>(edges.size());
  for (int a = 0; a < n; ++a) {
    const auto& ea = edges[static_cast<std::size_t>(a)];
    if (ea.task != task) continue;
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const auto& eb = edges[static_cast<std::size_t>(b)];
      if (eb.task != task) continue;
      if (a < b && ea.head == eb.head) out.binary.push_back({FactorType::sib, kind, a, b});
      if (a < b && ea.tail == eb.tail) out.binary.push_back({FactorType::cop, kind, a, b});
      if (binary_allows(kind, FactorType::gp) && ea.tail == eb.head && eb.tail != ea.head) {
        out.binary.push_back({FactorType::gp, kind, a, b});
      }
    }
  }
}

}  // namespace

FactorIndex enumerate_binary_factors(const std::vector<EdgeInstance>& edges, BinaryCase kind) {
  FactorIndex out;
  switch (kind) {
    case BinaryCase::homo_i:
      homo_pairs(edges, EdgeTask::role, kind, out);
      break;
    case BinaryCase::homo_ii:
      homo_pairs(edges, EdgeTask::relation, kind, out);
      break;
    case BinaryCase::hete_i: {
      const int n = static_cast<int>(edges.size());
      for (int a = 0; a < n; ++a) {
        const auto& role = edges[static_cast<std::size_t>(a)];
        if (role.task != EdgeTask::role) continue;
        for (int b = 0; b < n; ++b) {
          const auto& rel = edges[static_cast<std::size_t>(b)];
          if (rel.task != EdgeTask::relation) continue;
          if (role.tail == rel.tail) out.binary.push_back({FactorType::cop, kind, a, b});
          if (role.tail == rel.head) out.binary.push_back({FactorType::gp, kind, a, b});
        }
      }
      break;
    }
  }
  return out;
}

FactorIndex enumerate_ternary_factors(const std::vector<EdgeInstance>& edges, TernaryCase kind) {
  FactorIndex out;
  const EdgeTask task = ternary_task(kind);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].task == task) out.ternary.push_back({kind, edges[e].head, static_cast<int>(e), edges[e].tail});
  }
  return out;
}

bool FactorCases::has(BinaryCase c) const { return std::find(binary.begin(), binary.end(), c) != binary.end(); }
bool FactorCases::has(TernaryCase c) const { return std::find(ternary.begin(), ternary.end(), c) != ternary.end(); }

FactorIndex enumerate_factors(const std::vector<EdgeInstance>& edges, const FactorCases& cases) {
  FactorIndex out;
  for (BinaryCase c : cases.binary) out.merge(enumerate_binary_factors(edges, c));
  for (TernaryCase c : cases.ternary) out.merge(enumerate_ternary_factors(edges, c));
  return out;
}

}  // namespace hoie::schema
