#pragma once

#include <string_view>
#include <vector>

#include "hoie/schema/instance.hpp"

namespace hoie::schema {

enum class FactorType { sib, cop, gp };
// homo-i: role/role; homo-ii: relation/relation; hete-i: role/relation.
enum class BinaryCase { homo_i, homo_ii, hete_i };
// hete-ii: trigger, role, entity; hete-iii: entity, relation, entity.
enum class TernaryCase { hete_ii, hete_iii };

inline constexpr FactorType kFactorTypes[] = {FactorType::sib, FactorType::cop, FactorType::gp};
inline constexpr BinaryCase kBinaryCases[] = {BinaryCase::homo_i, BinaryCase::homo_ii, BinaryCase::hete_i};
inline constexpr TernaryCase kTernaryCases[] = {TernaryCase::hete_ii, TernaryCase::hete_iii};

const char* to_string(FactorType t);
const char* to_string(BinaryCase c);
const char* to_string(TernaryCase c);
// Throw std::invalid_argument on an unknown tag.
BinaryCase parse_binary_case(std::string_view tag);
TernaryCase parse_ternary_case(std::string_view tag);

bool binary_allows(BinaryCase c, FactorType t);
EdgeTask ternary_task(TernaryCase c);

// Edges are indices into the candidate edge list. For sib and cop, first <
// second. For gp, tail(first) = head(second). For hete-i, first is always
// the role edge.
struct BinaryFactor {
  FactorType type;
  BinaryCase kind;
  int first;
  int second;
};

struct TernaryFactor {
  TernaryCase kind;
  int head;  // node index
  int edge;  // edge index
  int tail;  // node index
};

struct FactorIndex {
  std::vector<BinaryFactor> binary;
  std::vector<TernaryFactor> ternary;

  std::size_t count(FactorType t) const;
  void merge(const FactorIndex& other);
};

FactorIndex enumerate_binary_factors(const std::vector<EdgeInstance>& edges, BinaryCase kind);
FactorIndex enumerate_ternary_factors(const std::vector<EdgeInstance>& edges, TernaryCase kind);

// Which factor cases a model uses.
struct FactorCases {
  std::vector<BinaryCase> binary;
  std::vector<TernaryCase> ternary;

  bool empty() const noexcept { return binary.empty() && ternary.empty(); }
  bool has(BinaryCase c) const;
  bool has(TernaryCase c) const;
};

FactorIndex enumerate_factors(const std::vector<EdgeInstance>& edges, const FactorCases& cases);

}  // namespace hoie::schema
