#include "hoie/inference/mfvi.hpp"

#include <cmath>
#include <stdexcept>

#include "hoie/numerics/composite.hpp"

namespace hoie::infer {

using namespace hoie::num;
using scoring::kind_slot;
using scoring::task_slot;
using schema::EdgeTask;
using schema::NodeKind;

void AlphaConfig::validate() const {
  for (double x : a)
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("alpha values must lie in [0, 1]");
}

AlphaVars constant_alphas(Graph& g, const AlphaConfig& alphas) {
  alphas.validate();
  AlphaVars out;
  for (std::size_t i = 0; i < 7; ++i) out[i] = g.scalar(alphas[i]);
  return out;
}

Posterior values(const PosteriorVars& q) {
  Posterior out;
  for (std::size_t s = 0; s < 2; ++s) {
    out.node[s] = q.node[s].value();
    out.edge[s] = q.edge[s].value();
    out.node_logits[s] = q.node_logits[s].value();
    out.edge_logits[s] = q.edge_logits[s].value();
  }
  return out;
}

namespace {

Graph& graph_of(const PotentialVars& pot) {
  for (const Var& v : pot.node_unary)
    if (v.valid()) return *v.graph;
  throw GraphError("potentials are not bound to a graph");
}

std::vector<std::size_t> rows(const std::vector<int>& v) { return {v.begin(), v.end()}; }

// Sums rows of msg [F, R] into an [n, R] result: out[idx[f]] += msg[f].
Var scatter(Var msg, const std::vector<int>& idx, std::size_t n) {
  Tensor inc({n, idx.size()});
  for (std::size_t f = 0; f < idx.size(); ++f) inc.at(static_cast<std::size_t>(idx[f]), f) = 1.0;
  return matmul(msg.graph->constant(std::move(inc)), msg);
}

void accumulate(Var& into, Var term) { into = into.valid() ? add(into, term) : term; }

std::size_t edge_count(const PotentialVars& pot, std::size_t slot) { return pot.layout.edges[slot].size(); }
std::size_t node_count(const PotentialVars& pot, std::size_t slot) { return pot.layout.nodes[slot].size(); }

// Node posteriors gathered per ternary factor, plus their projections onto
// the label tables for factored blocks. Both updates of a step read the same
// node posteriors, so this is built once per step.
struct NodeSide {
  Var qh, qt, ah, at;
};

std::vector<NodeSide> node_side(const PosteriorVars& q, const PotentialVars& pot) {
  std::vector<NodeSide> out;
  for (const auto& b : pot.ternary) {
    NodeSide n;
    if (!b.edges.empty()) {
      Var qh = q.node[kind_slot(scoring::Layout::head_kind(b.task))], qt = q.node[kind_slot(NodeKind::entity)];
      n.qh = take(qh, rows(b.heads));
      n.qt = take(qt, rows(b.tails));
      if (b.factors[0].valid()) {
        // project per node, then gather per factor
        n.ah = take(matmul(qh, b.factors[1]), rows(b.heads));
        n.at = take(matmul(qt, b.factors[2]), rows(b.tails));
      }
    }
    out.push_back(n);
  }
  return out;
}

// Messages of one block given densely.
void dense_ternary(const scoring::TernaryBlock<Var>& b, const NodeSide& n, Var qe, Var* edge, Var* head, Var* tail) {
  const std::size_t f = b.edges.size();
  const Shape& s = b.scores.shape();  // [F, Ls, Le, R]
  const std::size_t ls = s[1], le = s[2], r = s[3];
  if (edge) *edge = sum(sum(mul(mul(b.scores, reshape(n.qh, {f, ls, 1, 1})), reshape(n.qt, {f, 1, le, 1})), 1), 1);
  if (head) {
    Var sq = sum(mul(b.scores, reshape(qe, {f, 1, 1, r})), 3);  // [F, Ls, Le]
    *head = sum(mul(sq, reshape(n.qt, {f, 1, le})), 2);
    *tail = sum(mul(sq, reshape(n.qh, {f, ls, 1})), 1);
  }
}

// The same messages from the rank-d form: each expectation over a variable
// collapses to a [F, d] vector, so no [F, Ls, Le, R] tensor is formed.
void factored_ternary(const scoring::TernaryBlock<Var>& b, const NodeSide& n, Var qe, Var* edge, Var* head, Var* tail) {
  const auto& [g, es, ee, h] = b.factors;
  if (edge) *edge = matmul(mul(mul(g, n.ah), n.at), h, true);
  if (head) {
    Var ge = mul(g, matmul(qe, h));
    *head = matmul(mul(ge, n.at), es, true);
    *tail = matmul(mul(ge, n.ah), ee, true);
  }
}

// Ternary messages to edges from the node side, and to nodes from the node
// side together with the edge posteriors `qedge`.
Messages ternary_parts(const std::vector<NodeSide>& side, const std::array<Var, 2>& qedge, const PotentialVars& pot,
                       bool to_edges, bool to_nodes) {
  Messages out;
  for (std::size_t i = 0; i < pot.ternary.size(); ++i) {
    const auto& b = pot.ternary[i];
    if (b.edges.empty()) continue;
    const std::size_t hs = kind_slot(scoring::Layout::head_kind(b.task));
    const std::size_t es = kind_slot(NodeKind::entity);
    const std::size_t ts = task_slot(b.task);
    Var qe = to_nodes ? take(qedge[ts], rows(b.edges)) : Var{};
    Var edge, head, tail;
    auto* fn = b.factors[0].valid() ? factored_ternary : dense_ternary;
    fn(b, side[i], qe, to_edges ? &edge : nullptr, to_nodes ? &head : nullptr, to_nodes ? &tail : nullptr);
    if (to_edges) accumulate(out.edge[ts], scatter(edge, b.edges, edge_count(pot, ts)));
    if (to_nodes) {
      accumulate(out.node_head[hs], scatter(head, b.heads, node_count(pot, hs)));
      accumulate(out.node_tail[es], scatter(tail, b.tails, node_count(pot, es)));
    }
  }
  return out;
}

std::array<Var, 2> update_edges(const PosteriorVars& q, const std::vector<NodeSide>& side, const PotentialVars& pot,
                                 const AlphaVars& alphas, std::array<Var, 2>* logits) {
  auto bi = binary_messages(q, pot, alphas);
  auto ter = pot.ternary.empty() ? Messages{} : ternary_parts(side, q.edge, pot, true, false);
  std::array<Var, 2> out;
  for (std::size_t s = 0; s < 2; ++s) {
    Var l = pot.edge_unary[s];
    if (bi[s].valid()) l = add(l, mul(bi[s], alphas[3]));
    if (ter.edge[s].valid()) l = add(l, mul(ter.edge[s], alphas[4]));
    (*logits)[s] = l;
    out[s] = softmax(l);
  }
  return out;
}

std::array<Var, 2> update_nodes(const std::array<Var, 2>& qedge, const std::vector<NodeSide>& side,
                                 const PotentialVars& pot, const AlphaVars& alphas, std::array<Var, 2>* logits) {
  auto ter = pot.ternary.empty() ? Messages{} : ternary_parts(side, qedge, pot, false, true);
  std::array<Var, 2> out;
  for (std::size_t s = 0; s < 2; ++s) {
    Var l = pot.node_unary[s];
    if (ter.node_head[s].valid()) l = add(l, mul(ter.node_head[s], alphas[5]));
    if (ter.node_tail[s].valid()) l = add(l, mul(ter.node_tail[s], alphas[6]));
    (*logits)[s] = l;
    out[s] = softmax(l);
  }
  return out;
}

}  // namespace

PosteriorVars init_posteriors(const PotentialVars& pot) {
  PosteriorVars q;
  for (std::size_t s = 0; s < 2; ++s) {
    q.node_logits[s] = pot.node_unary[s];
    q.edge_logits[s] = pot.edge_unary[s];
    q.node[s] = softmax(pot.node_unary[s]);
    q.edge[s] = softmax(pot.edge_unary[s]);
  }
  return q;
}

std::array<Var, 2> binary_messages(const PosteriorVars& q, const PotentialVars& pot, const AlphaVars& alphas) {
  std::array<Var, 2> out;
  for (const auto& b : pot.binary) {
    const std::size_t f = b.first.size();
    if (f == 0) continue;
    const std::size_t s1 = task_slot(b.first_task), s2 = task_slot(b.second_task);
    const std::size_t r1 = b.scores.shape()[1], r2 = b.scores.shape()[2];
    Var q1 = take(q.edge[s1], rows(b.first));
    Var q2 = take(q.edge[s2], rows(b.second));
    Var to_first = sum(mul(b.scores, reshape(q2, {f, 1, r2})), 2);
    Var to_second = sum(mul(b.scores, reshape(q1, {f, r1, 1})), 1);
    Var a = alphas[static_cast<std::size_t>(b.type)];
    accumulate(out[s1], mul(scatter(to_first, b.first, edge_count(pot, s1)), a));
    accumulate(out[s2], mul(scatter(to_second, b.second, edge_count(pot, s2)), a));
  }
  return out;
}

Messages ternary_messages(const PosteriorVars& q, const PotentialVars& pot) {
  return ternary_parts(node_side(q, pot), q.edge, pot, true, true);
}

PosteriorVars mfvi_step(const PosteriorVars& q, const PotentialVars& pot, const AlphaVars& alphas, ScheduleMode mode) {
  PosteriorVars next;
  const auto side = node_side(q, pot);
  next.edge = update_edges(q, side, pot, alphas, &next.edge_logits);
  // Asynchronous: nodes see the edge posteriors just computed.
  const auto& qedge = mode == ScheduleMode::synchronous ? q.edge : next.edge;
  next.node = update_nodes(qedge, side, pot, alphas, &next.node_logits);
  return next;
}

PosteriorVars run_mfvi(const PotentialVars& pot, const Schedule& schedule, const AlphaVars& alphas) {
  if (schedule.iterations < 0) throw std::invalid_argument("MFVI iterations must be >= 0");
  graph_of(pot);
  PosteriorVars q = init_posteriors(pot);
  for (int t = 0; t < schedule.iterations; ++t) q = mfvi_step(q, pot, alphas, schedule.mode);
  return q;
}

std::vector<int> argmax_rows(const Tensor& t) {
  std::vector<int> out;
  if (t.rank() != 2) return out;
  const std::size_t rows = t.dim(0), cols = t.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < cols; ++c)
      if (t.at(r, c) > t.at(r, best)) best = c;
    out.push_back(static_cast<int>(best));
  }
  return out;
}

Assignment decode(const Posterior& q) {
  Assignment a;
  for (std::size_t s = 0; s < 2; ++s) {
    a.node[s] = argmax_rows(q.node[s]);
    a.edge[s] = argmax_rows(q.edge[s]);
  }
  return a;
}

double log_score(const PotentialSet& pot, const AlphaConfig& alphas, const Assignment& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    const Tensor& u = pot.node_unary[k];
    for (std::size_t i = 0; i < x.node[k].size(); ++i) s += u.at(i, static_cast<std::size_t>(x.node[k][i]));
    const Tensor& e = pot.edge_unary[k];
    for (std::size_t i = 0; i < x.edge[k].size(); ++i) s += e.at(i, static_cast<std::size_t>(x.edge[k][i]));
  }
  for (const auto& b : pot.binary) {
    const double w = alphas[3] * alphas.type(b.type);
    const std::size_t r1 = b.scores.dim(1), r2 = b.scores.dim(2);
    const auto& x1 = x.edge[task_slot(b.first_task)];
    const auto& x2 = x.edge[task_slot(b.second_task)];
    for (std::size_t f = 0; f < b.first.size(); ++f) {
      const auto m = static_cast<std::size_t>(x1[static_cast<std::size_t>(b.first[f])]);
      const auto n = static_cast<std::size_t>(x2[static_cast<std::size_t>(b.second[f])]);
      s += w * b.scores[(f * r1 + m) * r2 + n];
    }
  }
  for (const auto& b : pot.ternary) {
    const std::size_t ls = b.scores.dim(1), le = b.scores.dim(2), r = b.scores.dim(3);
    const auto& xh = x.node[kind_slot(scoring::Layout::head_kind(b.task))];
    const auto& xt = x.node[kind_slot(NodeKind::entity)];
    const auto& xe = x.edge[task_slot(b.task)];
    for (std::size_t f = 0; f < b.edges.size(); ++f) {
      const auto p = static_cast<std::size_t>(xh[static_cast<std::size_t>(b.heads[f])]);
      const auto qq = static_cast<std::size_t>(xt[static_cast<std::size_t>(b.tails[f])]);
      const auto m = static_cast<std::size_t>(xe[static_cast<std::size_t>(b.edges[f])]);
      s += alphas[4] * b.scores[((f * ls + p) * le + qq) * r + m];
    }
  }
  return s;
}

namespace {

// Visits every joint assignment in odometer order (first variable fastest).
template <class Fn>
void enumerate(const PotentialSet& pot, Fn&& fn) {
  Assignment x;
  std::vector<std::pair<int*, int>> vars;  // slot, label count
  double states = 1.0;
  for (std::size_t k = 0; k < 2; ++k) {
    const Tensor& u = pot.node_unary[k];
    x.node[k].assign(u.rank() == 2 ? u.dim(0) : 0, 0);
    const Tensor& e = pot.edge_unary[k];
    x.edge[k].assign(e.rank() == 2 ? e.dim(0) : 0, 0);
  }
  for (std::size_t k = 0; k < 2; ++k) {
    for (int& v : x.node[k]) vars.emplace_back(&v, static_cast<int>(pot.node_unary[k].dim(1)));
  }
  for (std::size_t k = 0; k < 2; ++k) {
    for (int& v : x.edge[k]) vars.emplace_back(&v, static_cast<int>(pot.edge_unary[k].dim(1)));
  }
  for (const auto& [ptr, n] : vars) {
    if (n == 0) return;
    states *= n;
  }
  if (states > kMaxJointStates) {
    throw std::length_error("exact enumeration over " + std::to_string(states) + " joint states exceeds the guard");
  }
  while (true) {
    fn(static_cast<const Assignment&>(x));
    std::size_t v = 0;
    while (v < vars.size() && ++*vars[v].first == vars[v].second) *vars[v++].first = 0;
    if (v == vars.size()) break;
  }
}

}  // namespace

Posterior exact_marginals(const PotentialSet& pot, const AlphaConfig& alphas) {
  std::vector<double> w;
  enumerate(pot, [&](const Assignment& x) { w.push_back(log_score(pot, alphas, x)); });
  const double log_z = logsumexp(w);
  Posterior out;
  for (std::size_t k = 0; k < 2; ++k) {
    out.node[k] = Tensor(pot.node_unary[k].shape());
    out.edge[k] = Tensor(pot.edge_unary[k].shape());
  }
  std::size_t i = 0;
  enumerate(pot, [&](const Assignment& x) {
    const double p = std::exp(w[i++] - log_z);
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t v = 0; v < x.node[k].size(); ++v) out.node[k].at(v, static_cast<std::size_t>(x.node[k][v])) += p;
      for (std::size_t v = 0; v < x.edge[k].size(); ++v) out.edge[k].at(v, static_cast<std::size_t>(x.edge[k][v])) += p;
    }
  });
  return out;
}

Assignment exact_map(const PotentialSet& pot, const AlphaConfig& alphas) {
  Assignment best;
  double best_score = -INFINITY;
  enumerate(pot, [&](const Assignment& x) {
    const double s = log_score(pot, alphas, x);
    if (s > best_score) {
      best_score = s;
      best = x;
    }
  });
  return best;
}

}  // namespace hoie::infer
