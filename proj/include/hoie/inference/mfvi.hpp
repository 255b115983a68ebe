#pragma once

#include <array>
#include <vector>

#include "hoie/scoring/potentials.hpp"

namespace hoie::infer {

using scoring::PotentialSet;
using scoring::PotentialVars;

// α1..α7 scale sib, cop, gp, edge-binary, edge-ternary, head-node-ternary and
// tail-node-ternary messages.
struct AlphaConfig {
  std::array<double, 7> a{1, 1, 1, 1, 1, 1, 1};

  double& operator[](std::size_t i) { return a[i]; }
  double operator[](std::size_t i) const { return a[i]; }
  double type(schema::FactorType t) const { return a[static_cast<std::size_t>(t)]; }
  static AlphaConfig zeros() { return {{0, 0, 0, 0, 0, 0, 0}}; }
  // Throws std::invalid_argument when any value is outside [0, 1].
  void validate() const;
};

using AlphaVars = std::array<num::Var, 7>;
AlphaVars constant_alphas(num::Graph& g, const AlphaConfig& alphas);

enum class ScheduleMode { synchronous, asynchronous };

struct Schedule {
  int iterations = 2;
  ScheduleMode mode = ScheduleMode::asynchronous;
};

// Per-group distributions: node[kind slot] is [N, L], edge[task slot] is [E, R].
// `*_logits` hold the unnormalized log-potentials the distributions were
// normalized from, so log Q can be taken without log(softmax(.)).
template <class T>
struct BasicPosterior {
  std::array<T, 2> node;
  std::array<T, 2> edge;
  std::array<T, 2> node_logits;
  std::array<T, 2> edge_logits;
};

using Posterior = BasicPosterior<num::Tensor>;
using PosteriorVars = BasicPosterior<num::Var>;

Posterior values(const PosteriorVars& q);

// Message sums F for every variable group.
struct Messages {
  std::array<num::Var, 2> edge;       // per task: [E, R]; invalid when no factor contributes
  std::array<num::Var, 2> node_head;  // per kind: ternary messages where the node is the head
  std::array<num::Var, 2> node_tail;  // per kind: ternary messages where the node is the tail
};

PosteriorVars init_posteriors(const PotentialVars& pot);
// Σ over binary blocks of α_type-scaled messages (α4 is applied at update time).
std::array<num::Var, 2> binary_messages(const PosteriorVars& q, const PotentialVars& pot, const AlphaVars& alphas);
// Unscaled ternary messages to edges, heads and tails.
Messages ternary_messages(const PosteriorVars& q, const PotentialVars& pot);

PosteriorVars mfvi_step(const PosteriorVars& q, const PotentialVars& pot, const AlphaVars& alphas, ScheduleMode mode);
PosteriorVars run_mfvi(const PotentialVars& pot, const Schedule& schedule, const AlphaVars& alphas);

// Labels per variable, grouped like the potentials.
struct Assignment {
  std::array<std::vector<int>, 2> node;
  std::array<std::vector<int>, 2> edge;

  bool operator==(const Assignment&) const = default;
};

// Per-variable argmax, lowest id on ties. Edge label 0 (NULL) means absent.
Assignment decode(const Posterior& q);
std::vector<int> argmax_rows(const num::Tensor& t);

// Exhaustive oracles over the Gibbs distribution
//   exp(Σ unary + Σ α4·α_type·binary + Σ α5·ternary).
// They agree with the mean-field fixed points when α5 = α6 = α7.
inline constexpr double kMaxJointStates = 1e6;
// Throw std::length_error when the joint state count exceeds kMaxJointStates.
Posterior exact_marginals(const PotentialSet& pot, const AlphaConfig& alphas);
Assignment exact_map(const PotentialSet& pot, const AlphaConfig& alphas);
double log_score(const PotentialSet& pot, const AlphaConfig& alphas, const Assignment& x);

}  // namespace hoie::infer
