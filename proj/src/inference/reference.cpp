#include "hoie/inference/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace hoie::infer::reference {

using num::Tensor;
using scoring::kind_slot;
using scoring::task_slot;

namespace {

Tensor softmax_rows(const Tensor& logits) {
  Tensor out(logits.shape());
  if (logits.rank() != 2) return out;
  for (std::size_t i = 0; i < logits.dim(0); ++i) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < logits.dim(1); ++j) mx = std::max(mx, logits.at(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < logits.dim(1); ++j) z += std::exp(logits.at(i, j) - mx);
    for (std::size_t j = 0; j < logits.dim(1); ++j) out.at(i, j) = std::exp(logits.at(i, j) - mx) / z;
  }
  return out;
}

std::size_t ix(int v) { return static_cast<std::size_t>(v); }

// Binary message sums per task, already scaled by α_type (not by α4).
std::array<Tensor, 2> binary_sums(const Posterior& q, const PotentialSet& pot, const AlphaConfig& alphas) {
  std::array<Tensor, 2> f{Tensor(pot.edge_unary[0].shape()), Tensor(pot.edge_unary[1].shape())};
  for (const auto& b : pot.binary) {
    const std::size_t s1 = task_slot(b.first_task), s2 = task_slot(b.second_task);
    const std::size_t r1 = b.scores.dim(1), r2 = b.scores.dim(2);
    const double a = alphas.type(b.type);
    for (std::size_t k = 0; k < b.first.size(); ++k) {
      const std::size_t e1 = ix(b.first[k]), e2 = ix(b.second[k]);
      for (std::size_t m = 0; m < r1; ++m)
        for (std::size_t n = 0; n < r2; ++n) {
          const double s = b.scores[(k * r1 + m) * r2 + n];
          f[s1].at(e1, m) += a * s * q.edge[s2].at(e2, n);
          f[s2].at(e2, n) += a * s * q.edge[s1].at(e1, m);
        }
    }
  }
  return f;
}

std::array<Tensor, 2> ternary_edge_sums(const Posterior& q, const PotentialSet& pot) {
  std::array<Tensor, 2> f{Tensor(pot.edge_unary[0].shape()), Tensor(pot.edge_unary[1].shape())};
  for (const auto& b : pot.ternary) {
    const std::size_t ls = b.scores.dim(1), le = b.scores.dim(2), r = b.scores.dim(3);
    const std::size_t hs = kind_slot(scoring::Layout::head_kind(b.task)), es = kind_slot(schema::NodeKind::entity);
    const std::size_t ts = task_slot(b.task);
    for (std::size_t k = 0; k < b.edges.size(); ++k)
      for (std::size_t p = 0; p < ls; ++p)
        for (std::size_t t = 0; t < le; ++t) {
          const double w = q.node[hs].at(ix(b.heads[k]), p) * q.node[es].at(ix(b.tails[k]), t);
          for (std::size_t m = 0; m < r; ++m) f[ts].at(ix(b.edges[k]), m) += w * b.scores[((k * ls + p) * le + t) * r + m];
        }
  }
  return f;
}

// Node sums with α6 on head messages and α7 on tail messages.
std::array<Tensor, 2> ternary_node_sums(const Posterior& q, const PotentialSet& pot, const AlphaConfig& alphas) {
  std::array<Tensor, 2> f{Tensor(pot.node_unary[0].shape()), Tensor(pot.node_unary[1].shape())};
  for (const auto& b : pot.ternary) {
    const std::size_t ls = b.scores.dim(1), le = b.scores.dim(2), r = b.scores.dim(3);
    const std::size_t hs = kind_slot(scoring::Layout::head_kind(b.task)), es = kind_slot(schema::NodeKind::entity);
    const std::size_t ts = task_slot(b.task);
    for (std::size_t k = 0; k < b.edges.size(); ++k) {
      const std::size_t h = ix(b.heads[k]), t = ix(b.tails[k]), e = ix(b.edges[k]);
      for (std::size_t p = 0; p < ls; ++p)
        for (std::size_t u = 0; u < le; ++u)
          for (std::size_t m = 0; m < r; ++m) {
            const double s = b.scores[((k * ls + p) * le + u) * r + m] * q.edge[ts].at(e, m);
            f[hs].at(h, p) += alphas[5] * s * q.node[es].at(t, u);
            f[es].at(t, u) += alphas[6] * s * q.node[hs].at(h, p);
          }
    }
  }
  return f;
}

}  // namespace

Posterior init_posteriors(const PotentialSet& pot) {
  Posterior q;
  for (std::size_t s = 0; s < 2; ++s) {
    q.node_logits[s] = pot.node_unary[s];
    q.edge_logits[s] = pot.edge_unary[s];
    q.node[s] = softmax_rows(pot.node_unary[s]);
    q.edge[s] = softmax_rows(pot.edge_unary[s]);
  }
  return q;
}

Posterior mfvi_step(const Posterior& q, const PotentialSet& pot, const AlphaConfig& alphas, ScheduleMode mode) {
  Posterior next;
  auto bi = binary_sums(q, pot, alphas);
  auto ter = ternary_edge_sums(q, pot);
  for (std::size_t s = 0; s < 2; ++s) {
    Tensor l = pot.edge_unary[s];
    for (std::size_t i = 0; i < l.size(); ++i) l[i] += alphas[3] * bi[s][i] + alphas[4] * ter[s][i];
    next.edge_logits[s] = l;
    next.edge[s] = softmax_rows(l);
  }
  Posterior src = q;
  if (mode == ScheduleMode::asynchronous) src.edge = next.edge;
  auto nodes = ternary_node_sums(src, pot, alphas);
  for (std::size_t s = 0; s < 2; ++s) {
    Tensor l = pot.node_unary[s];
    for (std::size_t i = 0; i < l.size(); ++i) l[i] += nodes[s][i];
    next.node_logits[s] = l;
    next.node[s] = softmax_rows(l);
  }
  return next;
}

Posterior run_mfvi(const PotentialSet& pot, const Schedule& schedule, const AlphaConfig& alphas) {
  if (schedule.iterations < 0) throw std::invalid_argument("MFVI iterations must be >= 0");
  Posterior q = init_posteriors(pot);
  for (int t = 0; t < schedule.iterations; ++t) q = mfvi_step(q, pot, alphas, schedule.mode);
  return q;
}

}  // namespace hoie::infer::reference
