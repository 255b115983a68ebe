#pragma once

#include <array>
#include <vector>

#include "hoie/numerics/graph.hpp"
#include "hoie/schema/factors.hpp"

namespace hoie::scoring {

using schema::BinaryCase;
using schema::EdgeTask;
using schema::FactorType;
using schema::NodeKind;
using schema::TernaryCase;

inline constexpr std::size_t kind_slot(NodeKind k) { return k == NodeKind::trigger ? 0 : 1; }
inline constexpr std::size_t task_slot(EdgeTask t) { return t == EdgeTask::role ? 0 : 1; }

// Variables grouped by node kind and edge task. "Local" indices count within
// a group; each group has its own label set.
struct Layout {
  std::vector<NodeKind> node_kind;          // per global node
  std::vector<int> node_local;              // per global node
  std::array<std::vector<int>, 2> nodes;    // per kind slot: global node ids
  std::vector<EdgeTask> edge_task;          // per global edge
  std::vector<int> edge_local;              // per global edge
  std::array<std::vector<int>, 2> edges;    // per task slot: global edge ids
  std::array<std::vector<int>, 2> head_local;  // per task slot, per local edge: local index of the head node
  std::array<std::vector<int>, 2> tail_local;  // likewise for the tail (always an entity)

  std::size_t node_count(NodeKind k) const { return nodes[kind_slot(k)].size(); }
  std::size_t edge_count(EdgeTask t) const { return edges[task_slot(t)].size(); }
  static NodeKind head_kind(EdgeTask t) { return t == EdgeTask::role ? NodeKind::trigger : NodeKind::entity; }
};

Layout make_layout(const schema::InstanceGraph& graph);

// All factors of one (type, case): scores[f, m, n] for first label m, second label n.
template <class T>
struct BinaryBlock {
  FactorType type;
  BinaryCase kind;
  EdgeTask first_task;
  EdgeTask second_task;
  std::vector<int> first;   // local edge index in first_task
  std::vector<int> second;  // local edge index in second_task
  T scores;                 // [F, R1, R2]
};

// All factors of one case: scores[f, p, q, m] for head label p, tail label q, edge label m.
template <class T>
struct TernaryBlock {
  TernaryCase kind;
  EdgeTask task;
  std::vector<int> edges;  // local edge index
  std::vector<int> heads;  // local node index in the head kind
  std::vector<int> tails;  // local entity index
  T scores;                // [F, Ls, Le, R]
  // Rank-d form scores[f, p, q, m] = Σ_d g[f, d]·es[p, d]·ee[q, d]·h[m, d] as
  // {g, es, ee, h}. The scorer fills only this; inference then never builds
  // the dense tensor. Empty for potentials given densely.
  std::array<T, 4> factors{};
};

// Unary scores per variable group plus the high-order blocks for one sentence.
template <class T>
struct BasicPotentials {
  Layout layout;
  std::array<T, 2> node_unary;  // per kind slot: [N, L]
  std::array<T, 2> edge_unary;  // per task slot: [E, R]
  std::vector<BinaryBlock<T>> binary;
  std::vector<TernaryBlock<T>> ternary;
};

using PotentialSet = BasicPotentials<num::Tensor>;
using PotentialVars = BasicPotentials<num::Var>;

// Groups the factors of `index` into blocks with local indices; scores left empty.
template <class T>
void add_factor_blocks(BasicPotentials<T>& pot, const schema::InstanceGraph& graph, const schema::FactorIndex& index);

// Dense [F, Ls, Le, R] scores of a block, built from the rank-d form if that is what it holds.
num::Var dense_scores(const TernaryBlock<num::Var>& b);

PotentialSet materialize(const PotentialVars& p);
PotentialVars bind(num::Graph& g, const PotentialSet& p);

// Number of labels per group, read from the unary tensors.
std::size_t node_labels(const PotentialSet& p, NodeKind k);
std::size_t edge_labels(const PotentialSet& p, EdgeTask t);

}  // namespace hoie::scoring
