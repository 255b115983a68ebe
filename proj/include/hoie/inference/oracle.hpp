#pragma once

#include <cstdint>

#include "hoie/inference/mfvi.hpp"
#include "hoie/numerics/rng.hpp"

namespace hoie::infer {

// A fully connected random graph: every candidate edge, every factor of `cases`.
struct RandomGraphSpec {
  int triggers = 1;
  int entities = 2;
  std::size_t trigger_labels = 2;
  std::size_t entity_labels = 2;
  std::size_t role_labels = 2;
  std::size_t relation_labels = 2;
  schema::FactorCases cases{{schema::BinaryCase::homo_i, schema::BinaryCase::homo_ii, schema::BinaryCase::hete_i},
                            {schema::TernaryCase::hete_ii, schema::TernaryCase::hete_iii}};
  double scale = 1.0;        // std-dev of the binary and ternary scores
  double unary_scale = 1.0;  // std-dev of the node and edge unary scores
};

schema::LabelSchema random_schema();
schema::InstanceGraph random_graph(const RandomGraphSpec& spec);
num::Tensor random_tensor(num::Shape shape, double scale, Rng& rng);
PotentialSet random_potentials(const RandomGraphSpec& spec, Rng& rng);

// At most 4 nodes, 6 edges and 3 labels per variable, all factor types.
RandomGraphSpec small_graph_spec(Rng& rng, double scale);

struct MfviOracleReport {
  std::size_t graphs = 0;
  std::size_t variables = 0;
  std::size_t map_matches = 0;  // variables where decode(Q) equals the exact MAP label
  double mean_l1_gap = 0.0;     // per variable, Σ_labels |Q - P|
  double max_l1_gap = 0.0;

  double map_agreement() const { return variables == 0 ? 1.0 : static_cast<double>(map_matches) / variables; }
};

// run_mfvi against exact_marginals / exact_map on `graphs` small random graphs.
MfviOracleReport mfvi_oracle(std::uint64_t seed, std::size_t graphs, double scale, const Schedule& schedule,
                             const AlphaConfig& alphas = {});

}  // namespace hoie::infer
