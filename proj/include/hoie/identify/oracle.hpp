#pragma once

#include <cstdint>
#include <vector>

#include "hoie/numerics/tensor.hpp"

namespace hoie::ident {

struct ChainEnumeration {
  std::vector<int> best;  // first maximizer in odometer order (position 0 fastest)
  double best_score = 0.0;
  double log_z = 0.0;
};

// Scores every tag sequence. Throws std::length_error past 10^7 sequences.
ChainEnumeration enumerate_chain(const num::Tensor& emissions, const num::Tensor& transitions);

struct ChainOracleReport {
  std::size_t instances = 0;
  std::size_t viterbi_matches = 0;
  double max_log_z_gap = 0.0;
};

// Random chains (1..max_len tokens, 1..max_tags tags, N(0,1) scores) checked
// against enumeration.
ChainOracleReport chain_crf_oracle(std::uint64_t seed, std::size_t instances, std::size_t max_len = 8,
                                   std::size_t max_tags = 4);

}  // namespace hoie::ident
