#pragma once

#include <map>
#include <string>

#include "hoie/numerics/composite.hpp"
#include "hoie/scoring/potentials.hpp"

namespace hoie::scoring {

struct ScoringConfig {
  // unary FNN widths
  std::size_t entity_hidden = 150;
  std::size_t trigger_hidden = 600;
  std::size_t relation_width = 150;
  std::size_t role_width = 600;
  // high-order FNN widths; head/tail/mid must agree (d3), as must ternary head/tail (d4)
  std::size_t binary_head = 150;
  std::size_t binary_tail = 150;
  std::size_t binary_mid = 150;
  std::size_t ternary_head = 150;
  std::size_t ternary_tail = 150;
  // ablations
  bool share_labels = false;  // high-order label tables reuse the unary label representations
  bool node_reps = true;      // false: every g vector is all-ones
  double dropout = 0.4;

  std::size_t d3() const { return binary_head; }
  std::size_t d4() const { return ternary_head; }
  // Throws std::invalid_argument.
  void validate() const;
};

// Unary FNNs, the decomposed biaffine edge scorers and the binary/ternary
// scorers for the factor cases in use. Unary node FNNs are two layers with a
// ReLU; every other FNN is a single linear layer.
class Scorers {
 public:
  Scorers() = default;
  Scorers(const ScoringConfig& config, const schema::LabelSchema& schema, const schema::FactorCases& cases,
          std::size_t input_width, num::ParameterStore& store);

  const ScoringConfig& config() const noexcept { return config_; }
  const schema::FactorCases& cases() const noexcept { return cases_; }

  // z: [N, input_width], one row per node of `graph`.
  PotentialVars score(num::Graph& g, num::Var z, const schema::InstanceGraph& graph,
                      const schema::FactorIndex& index) const;
  // Unary potentials only (no high-order parameters touched).
  PotentialVars score_unary(num::Graph& g, num::Var z, const schema::InstanceGraph& graph) const;

  num::Var unary_node_scores(num::Graph& g, num::Var z, NodeKind kind) const;
  num::Var unary_edge_scores(num::Graph& g, num::Var z_heads, num::Var z_tails, EdgeTask task) const;

  // Single-factor scores in evaluation mode, for checks against the batched form.
  // sib: (i; j, k) with j, k the tails; cop: (i, j; k) with k the shared tail; gp: i -> j -> k.
  double binary_score(FactorType type, BinaryCase kind, const num::Tensor& zi, const num::Tensor& zj,
                      const num::Tensor& zk, int m, int n) const;
  double ternary_score(TernaryCase kind, const num::Tensor& zi, const num::Tensor& zj, int p, int q, int m) const;

 private:
  struct Linear {
    num::Parameter* w = nullptr;
    num::Parameter* b = nullptr;
  };
  Linear linear(num::ParameterStore& store, const std::string& name, std::size_t in, std::size_t out);
  num::Var apply(num::Graph& g, const Linear& l, num::Var x, const std::string& site) const;
  num::Var apply_nodrop(num::Graph& g, const Linear& l, num::Var x) const;

  struct GVectors {
    num::Var s, e, mid;
  };
  // Node vectors from the rows each role reads (zmid only for gp).
  GVectors binary_g(num::Graph& g, FactorType type, num::Var zs, num::Var ze, num::Var zmid) const;
  num::Var table(num::Graph& g, const std::string& name) const;
  num::Var edge_label_reps(num::Graph& g, EdgeTask t) const;
  num::Var node_label_reps(num::Graph& g, NodeKind k) const;
  // Label tables of a binary block (first, second); the same Var twice when shared.
  std::pair<num::Var, num::Var> binary_tables(num::Graph& g, BinaryCase kind, FactorType type) const;
  std::array<num::Var, 3> ternary_tables(num::Graph& g, TernaryCase kind) const;
  num::Var factor_pairs(const GVectors& gv, FactorType type, const std::vector<int>& i, const std::vector<int>& j,
                        const std::vector<int>& k) const;

  ScoringConfig config_;
  schema::FactorCases cases_;
  std::array<std::size_t, 2> node_label_count_{};
  std::array<std::size_t, 2> edge_label_count_{};
  std::size_t input_width_ = 0;

  std::array<Linear, 2> node_l1_, node_l2_;   // per kind slot; l2.w stored [L, hidden]
  std::array<Linear, 2> edge_s_, edge_e_;     // per task slot
  std::array<num::Parameter*, 2> edge_h_{};   // per task slot, [R, d_task]
  std::map<FactorType, std::array<Linear, 3>> binary_g_;  // s, e, mid
  std::map<TernaryCase, std::array<Linear, 2>> ternary_g_;
  std::map<std::string, num::Parameter*> tables_;
};

}  // namespace hoie::scoring
