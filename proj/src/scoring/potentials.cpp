#include "hoie/scoring/potentials.hpp"

#include <map>
#include <stdexcept>

#include "hoie/numerics/ops.hpp"

namespace hoie::scoring {

using namespace hoie::num;

Layout make_layout(const schema::InstanceGraph& graph) {
  Layout l;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const NodeKind k = graph.nodes[i].kind;
    auto& group = l.nodes[kind_slot(k)];
    l.node_kind.push_back(k);
    l.node_local.push_back(static_cast<int>(group.size()));
    group.push_back(static_cast<int>(i));
  }
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    const std::size_t h = static_cast<std::size_t>(edge.head), t = static_cast<std::size_t>(edge.tail);
    if (h >= graph.nodes.size() || t >= graph.nodes.size()) throw std::out_of_range("edge endpoint out of range");
    if (graph.nodes[h].kind != Layout::head_kind(edge.task) || graph.nodes[t].kind != NodeKind::entity) {
      throw std::invalid_argument("edge endpoints do not match its task");
    }
    const std::size_t s = task_slot(edge.task);
    l.edge_task.push_back(edge.task);
    l.edge_local.push_back(static_cast<int>(l.edges[s].size()));
    l.edges[s].push_back(static_cast<int>(e));
    l.head_local[s].push_back(l.node_local[h]);
    l.tail_local[s].push_back(l.node_local[t]);
  }
  return l;
}

template <class T>
void add_factor_blocks(BasicPotentials<T>& pot, const schema::InstanceGraph& graph, const schema::FactorIndex& index) {
  const Layout& l = pot.layout;
  std::map<std::pair<BinaryCase, FactorType>, std::size_t> where;
  for (const auto& f : index.binary) {
    auto key = std::make_pair(f.kind, f.type);
    auto it = where.find(key);
    if (it == where.end()) {
      const EdgeTask t1 = l.edge_task[static_cast<std::size_t>(f.first)];
      const EdgeTask t2 = l.edge_task[static_cast<std::size_t>(f.second)];
      it = where.emplace(key, pot.binary.size()).first;
      pot.binary.push_back(BinaryBlock<T>{f.type, f.kind, t1, t2, {}, {}, T{}});
    }
    auto& b = pot.binary[it->second];
    b.first.push_back(l.edge_local[static_cast<std::size_t>(f.first)]);
    b.second.push_back(l.edge_local[static_cast<std::size_t>(f.second)]);
  }
  std::map<TernaryCase, std::size_t> twhere;
  for (const auto& f : index.ternary) {
    auto it = twhere.find(f.kind);
    if (it == twhere.end()) {
      it = twhere.emplace(f.kind, pot.ternary.size()).first;
      pot.ternary.push_back(TernaryBlock<T>{f.kind, schema::ternary_task(f.kind), {}, {}, {}, T{}});
    }
    auto& b = pot.ternary[it->second];
    const auto& edge = graph.edges[static_cast<std::size_t>(f.edge)];
    b.edges.push_back(l.edge_local[static_cast<std::size_t>(f.edge)]);
    b.heads.push_back(l.node_local[static_cast<std::size_t>(edge.head)]);
    b.tails.push_back(l.node_local[static_cast<std::size_t>(edge.tail)]);
  }
}

template void add_factor_blocks(PotentialSet&, const schema::InstanceGraph&, const schema::FactorIndex&);
template void add_factor_blocks(PotentialVars&, const schema::InstanceGraph&, const schema::FactorIndex&);

namespace {

// Row indices that enumerate a row-major [outer, n, inner] grid along its middle axis.
std::vector<std::size_t> grid_rows(std::size_t outer, std::size_t n, std::size_t inner) {
  std::vector<std::size_t> out;
  out.reserve(outer * n * inner);
  for (std::size_t a = 0; a < outer; ++a)
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t b = 0; b < inner; ++b) out.push_back(m);
  return out;
}

}  // namespace

Var dense_scores(const TernaryBlock<Var>& b) {
  if (b.scores.valid()) return b.scores;
  const auto& [g, es, ee, h] = b.factors;
  if (!g.valid()) throw std::invalid_argument("ternary block holds neither dense nor factored scores");
  const std::size_t f = g.shape()[0], ls = es.shape()[0], le = ee.shape()[0], r = h.shape()[0];
  Var lt = mul(mul(take(es, grid_rows(1, ls, le * r)), take(ee, grid_rows(ls, le, r))), take(h, grid_rows(ls * le, r, 1)));
  return reshape(matmul(g, lt, true), {f, ls, le, r});
}

PotentialSet materialize(const PotentialVars& p) {
  PotentialSet out;
  out.layout = p.layout;
  for (std::size_t s = 0; s < 2; ++s) {
    out.node_unary[s] = p.node_unary[s].value();
    out.edge_unary[s] = p.edge_unary[s].value();
  }
  for (const auto& b : p.binary)
    out.binary.push_back({b.type, b.kind, b.first_task, b.second_task, b.first, b.second, b.scores.value()});
  for (const auto& b : p.ternary)
    out.ternary.push_back({b.kind, b.task, b.edges, b.heads, b.tails, dense_scores(b).value()});
  return out;
}

PotentialVars bind(Graph& g, const PotentialSet& p) {
  PotentialVars out;
  out.layout = p.layout;
  for (std::size_t s = 0; s < 2; ++s) {
    out.node_unary[s] = g.constant(p.node_unary[s]);
    out.edge_unary[s] = g.constant(p.edge_unary[s]);
  }
  for (const auto& b : p.binary)
    out.binary.push_back({b.type, b.kind, b.first_task, b.second_task, b.first, b.second, g.constant(b.scores)});
  for (const auto& b : p.ternary)
    out.ternary.push_back({b.kind, b.task, b.edges, b.heads, b.tails, g.constant(b.scores)});
  return out;
}

std::size_t node_labels(const PotentialSet& p, NodeKind k) {
  const Tensor& t = p.node_unary[kind_slot(k)];
  return t.rank() == 2 ? t.dim(1) : 0;
}

std::size_t edge_labels(const PotentialSet& p, EdgeTask t) {
  const Tensor& u = p.edge_unary[task_slot(t)];
  return u.rank() == 2 ? u.dim(1) : 0;
}

}  // namespace hoie::scoring
