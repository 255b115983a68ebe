#include "hoie/identify/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hoie/identify/crf.hpp"
#include "hoie/numerics/rng.hpp"

namespace hoie::ident {

ChainEnumeration enumerate_chain(const num::Tensor& em, const num::Tensor& a) {
  const std::size_t n = em.dim(0), k = em.dim(1);
  if (std::pow(static_cast<double>(k), static_cast<double>(n)) > 1e7)
    throw std::length_error("chain enumeration over too many sequences");
  ChainEnumeration out;
  out.best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> scores;
  std::vector<int> y(n, 0);
  while (true) {
    const double s = sequence_score(y, em, a);
    scores.push_back(s);
    if (s > out.best_score) {
      out.best_score = s;
      out.best = y;
    }
    std::size_t t = 0;
    while (t < n && ++y[t] == static_cast<int>(k)) y[t++] = 0;
    if (t == n) break;
  }
  long double acc = 0;
  for (double s : scores) acc += std::exp(static_cast<long double>(s - out.best_score));
  out.log_z = out.best_score + static_cast<double>(std::log(acc));
  return out;
}

ChainOracleReport chain_crf_oracle(std::uint64_t seed, std::size_t instances, std::size_t max_len,
                                   std::size_t max_tags) {
  Rng rng(derive_seed(seed, "chain-oracle"));
  std::normal_distribution<double> normal(0.0, 1.0);
  ChainOracleReport r;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = 1 + rng() % max_len, k = 1 + rng() % max_tags;
    num::Tensor em({n, k}), a({k, k});
    for (double& v : em.data()) v = normal(rng);
    for (double& v : a.data()) v = normal(rng);
    const auto truth = enumerate_chain(em, a);
    r.instances += 1;
    r.viterbi_matches += viterbi_decode(em, a) == truth.best;
    r.max_log_z_gap = std::max(r.max_log_z_gap, std::abs(log_partition(em, a) - truth.log_z));
  }
  return r;
}

}  // namespace hoie::ident
