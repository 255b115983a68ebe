#include "hoie/scoring/scorer.hpp"

#include <algorithm>
#include <stdexcept>

namespace hoie::scoring {

using namespace hoie::num;
using schema::FactorCases;
using schema::LabelSchema;

void ScoringConfig::validate() const {
  for (std::size_t w : {entity_hidden, trigger_hidden, relation_width, role_width, binary_head, ternary_head}) {
    if (w == 0) throw std::invalid_argument("scoring widths must be > 0");
  }
  if (binary_tail != binary_head || binary_mid != binary_head) {
    throw std::invalid_argument("binary head/tail/mid widths must be equal");
  }
  if (ternary_tail != ternary_head) throw std::invalid_argument("ternary head/tail widths must be equal");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0, 1)");
}

Scorers::Linear Scorers::linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out) {
  return {&store.create(name + ".w", {in, out}, ParamGroup::other, Init::glorot),
          &store.create(name + ".b", {out}, ParamGroup::other, Init::zeros)};
}

Scorers::Scorers(const ScoringConfig& config, const LabelSchema& schema, const FactorCases& cases,
                 std::size_t input_width, ParameterStore& store)
    : config_(config), cases_(cases), input_width_(input_width) {
  config_.validate();
  const std::size_t d_node[2] = {config_.trigger_hidden, config_.entity_hidden};
  const std::size_t d_edge[2] = {config_.role_width, config_.relation_width};
  const char* kind_name[2] = {"trigger", "entity"};
  const char* task_name[2] = {"role", "relation"};
  node_label_count_ = {schema.event.size(), schema.entity.size()};
  edge_label_count_ = {schema.role.size(), schema.relation.size()};

  for (std::size_t s = 0; s < 2; ++s) {
    const std::string p = std::string("unary.") + kind_name[s];
    node_l1_[s] = linear(store, p + ".l1", input_width, d_node[s]);
    node_l2_[s] = {&store.create(p + ".l2.w", {node_label_count_[s], d_node[s]}, ParamGroup::other, Init::glorot),
                   &store.create(p + ".l2.b", {node_label_count_[s]}, ParamGroup::other, Init::zeros)};
  }
  for (std::size_t s = 0; s < 2; ++s) {
    const std::string p = std::string("unary.") + task_name[s];
    edge_s_[s] = linear(store, p + ".s", input_width, d_edge[s]);
    edge_e_[s] = linear(store, p + ".e", input_width, d_edge[s]);
    edge_h_[s] = &store.create(p + ".H", {edge_label_count_[s], d_edge[s]}, ParamGroup::other, Init::glorot);
  }

  const std::size_t d3 = config_.d3(), d4 = config_.d4();
  auto need_width = [&](std::size_t have, std::size_t want, const std::string& what) {
    if (have != want) {
      throw std::invalid_argument("shared label tables need " + what + " width " + std::to_string(have) +
                                  " to equal the high-order width " + std::to_string(want));
    }
  };
  for (BinaryCase c : cases_.binary) {
    for (FactorType t : schema::kFactorTypes) {
      if (!schema::binary_allows(c, t)) continue;
      if (!binary_g_.count(t)) {
        const std::string p = std::string("binary.") + schema::to_string(t);
        binary_g_[t] = {linear(store, p + ".s", input_width, d3), linear(store, p + ".e", input_width, d3),
                        t == FactorType::gp ? linear(store, p + ".mid", input_width, d3) : Linear{}};
      }
      const std::string p = std::string("binary.") + schema::to_string(c) + "." + schema::to_string(t);
      const bool homo = c != BinaryCase::hete_i;
      const EdgeTask first = c == BinaryCase::homo_ii ? EdgeTask::relation : EdgeTask::role;
      const EdgeTask second = c == BinaryCase::homo_i ? EdgeTask::role : EdgeTask::relation;
      if (config_.share_labels) {
        need_width(d_edge[task_slot(first)], d3, schema::to_string(first));
        need_width(d_edge[task_slot(second)], d3, schema::to_string(second));
        continue;
      }
      if (homo && t != FactorType::gp) {
        tables_[p + ".h"] = &store.create(p + ".h", {edge_label_count_[task_slot(first)], d3}, ParamGroup::other);
      } else {
        tables_[p + ".h1"] = &store.create(p + ".h1", {edge_label_count_[task_slot(first)], d3}, ParamGroup::other);
        tables_[p + ".h2"] = &store.create(p + ".h2", {edge_label_count_[task_slot(second)], d3}, ParamGroup::other);
      }
    }
  }
  for (TernaryCase c : cases_.ternary) {
    const std::string p = std::string("ternary.") + schema::to_string(c);
    ternary_g_[c] = {linear(store, p + ".s", input_width, d4), linear(store, p + ".e", input_width, d4)};
    const EdgeTask task = schema::ternary_task(c);
    const NodeKind hk = Layout::head_kind(task);
    if (config_.share_labels) {
      need_width(d_node[kind_slot(hk)], d4, kind_name[kind_slot(hk)]);
      need_width(d_node[kind_slot(NodeKind::entity)], d4, "entity");
      need_width(d_edge[task_slot(task)], d4, schema::to_string(task));
      continue;
    }
    tables_[p + ".es"] = &store.create(p + ".es", {node_label_count_[kind_slot(hk)], d4}, ParamGroup::other);
    tables_[p + ".ee"] = &store.create(p + ".ee", {node_label_count_[kind_slot(NodeKind::entity)], d4}, ParamGroup::other);
    tables_[p + ".h"] = &store.create(p + ".h", {edge_label_count_[task_slot(task)], d4}, ParamGroup::other);
  }
}

Var Scorers::apply_nodrop(Graph& g, const Linear& l, Var x) const {
  return affine(x, g.parameter(*l.w), g.parameter(*l.b));
}

Var Scorers::apply(Graph& g, const Linear& l, Var x, const std::string& site) const {
  return apply_nodrop(g, l, dropout(x, config_.dropout, site));
}

Var Scorers::unary_node_scores(Graph& g, Var z, NodeKind kind) const {
  const std::size_t s = kind_slot(kind);
  if (z.value().rank() != 2 || z.shape()[1] != input_width_) throw ShapeError("node representation width mismatch");
  Var h = relu(apply(g, node_l1_[s], z, std::string("unary.") + schema::to_string(kind)));
  return add(matmul(h, g.parameter(*node_l2_[s].w), true), g.parameter(*node_l2_[s].b));
}

Var Scorers::unary_edge_scores(Graph& g, Var z_heads, Var z_tails, EdgeTask task) const {
  const std::size_t s = task_slot(task);
  for (Var z : {z_heads, z_tails})
    if (z.value().rank() != 2 || z.shape()[1] != input_width_) throw ShapeError("edge endpoint width mismatch");
  const std::string site = std::string("unary.") + schema::to_string(task);
  Var hs = apply(g, edge_s_[s], z_heads, site + ".s");
  Var ht = apply(g, edge_e_[s], z_tails, site + ".e");
  return matmul(mul(hs, ht), g.parameter(*edge_h_[s]), true);
}

PotentialVars Scorers::score_unary(Graph& g, Var z, const schema::InstanceGraph& graph) const {
  PotentialVars pot;
  pot.layout = make_layout(graph);
  const Layout& l = pot.layout;
  if (z.value().rank() != 2 || z.shape()[0] != graph.nodes.size()) {
    throw ShapeError("expected one representation row per node");
  }
  for (NodeKind k : {NodeKind::trigger, NodeKind::entity}) {
    const auto& ids = l.nodes[kind_slot(k)];
    pot.node_unary[kind_slot(k)] = unary_node_scores(g, take(z, {ids.begin(), ids.end()}), k);
  }
  for (EdgeTask t : {EdgeTask::role, EdgeTask::relation}) {
    const std::size_t s = task_slot(t);
    std::vector<std::size_t> heads, tails;
    for (int e : l.edges[s]) {
      heads.push_back(static_cast<std::size_t>(graph.edges[static_cast<std::size_t>(e)].head));
      tails.push_back(static_cast<std::size_t>(graph.edges[static_cast<std::size_t>(e)].tail));
    }
    // project every node once, then gather endpoints
    const std::string site = std::string("unary.") + schema::to_string(t);
    Var hs = take(apply(g, edge_s_[s], z, site + ".s"), std::move(heads));
    Var ht = take(apply(g, edge_e_[s], z, site + ".e"), std::move(tails));
    pot.edge_unary[s] = matmul(mul(hs, ht), g.parameter(*edge_h_[s]), true);
  }
  return pot;
}

Scorers::GVectors Scorers::binary_g(Graph& g, FactorType type, Var zs, Var ze, Var zmid) const {
  const auto& lin = binary_g_.at(type);
  const std::string site = std::string("binary.") + schema::to_string(type);
  if (!config_.node_reps) {
    auto ones = [&](Var z) { return z.valid() ? g.constant(Tensor({z.shape()[0], config_.d3()}, 1.0)) : Var{}; };
    return {ones(zs), ones(ze), ones(zmid)};
  }
  GVectors gv{apply(g, lin[0], zs, site + ".s"), apply(g, lin[1], ze, site + ".e"), Var{}};
  if (type == FactorType::gp) gv.mid = apply(g, lin[2], zmid, site + ".mid");
  return gv;
}

Var Scorers::table(Graph& g, const std::string& name) const { return g.parameter(*tables_.at(name)); }

Var Scorers::edge_label_reps(Graph& g, EdgeTask t) const { return g.parameter(*edge_h_[task_slot(t)]); }

Var Scorers::node_label_reps(Graph& g, NodeKind k) const { return g.parameter(*node_l2_[kind_slot(k)].w); }

std::pair<Var, Var> Scorers::binary_tables(Graph& g, BinaryCase kind, FactorType type) const {
  const EdgeTask first = kind == BinaryCase::homo_ii ? EdgeTask::relation : EdgeTask::role;
  const EdgeTask second = kind == BinaryCase::homo_i ? EdgeTask::role : EdgeTask::relation;
  if (config_.share_labels) return {edge_label_reps(g, first), edge_label_reps(g, second)};
  const std::string p = std::string("binary.") + schema::to_string(kind) + "." + schema::to_string(type);
  if (kind != BinaryCase::hete_i && type != FactorType::gp) {
    Var h = table(g, p + ".h");
    return {h, h};
  }
  return {table(g, p + ".h1"), table(g, p + ".h2")};
}

std::array<Var, 3> Scorers::ternary_tables(Graph& g, TernaryCase kind) const {
  const EdgeTask task = schema::ternary_task(kind);
  if (config_.share_labels) {
    return {node_label_reps(g, Layout::head_kind(task)), node_label_reps(g, NodeKind::entity), edge_label_reps(g, task)};
  }
  const std::string p = std::string("ternary.") + schema::to_string(kind);
  return {table(g, p + ".es"), table(g, p + ".ee"), table(g, p + ".h")};
}

namespace {

std::vector<std::size_t> rows(const std::vector<int>& v) { return {v.begin(), v.end()}; }

// Sorted distinct node ids. Node vectors are computed for these rows only.
std::vector<int> distinct(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

// Position of each id within `set`.
std::vector<int> positions(const std::vector<int>& ids, const std::vector<int>& set) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(static_cast<int>(std::lower_bound(set.begin(), set.end(), id) - set.begin()));
  return out;
}

// Which node vector (s, e, mid) each of the three factor nodes i, j, k reads.
constexpr int kRole[3][3] = {{0, 1, 1}, {0, 0, 1}, {0, 2, 1}};  // sib, cop, gp

// Row indices that enumerate a row-major [outer, n, inner] grid along its middle axis.
std::vector<std::size_t> grid_rows(std::size_t outer, std::size_t n, std::size_t inner) {
  std::vector<std::size_t> out;
  out.reserve(outer * n * inner);
  for (std::size_t a = 0; a < outer; ++a)
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t b = 0; b < inner; ++b) out.push_back(m);
  return out;
}

// [R1 * R2, d] with row (m, n) = a[m] ∘ b[n].
Var outer_rows(Var a, Var b) {
  const std::size_t r1 = a.shape()[0], r2 = b.shape()[0];
  return mul(take(a, grid_rows(1, r1, r2)), take(b, grid_rows(r1, r2, 1)));
}

}  // namespace

// Per-factor product of the three node vectors. The two vectors that play the
// same role (sib tails, cop heads) are multiplied together first, so swapping
// them leaves every bit of the result unchanged.
Var Scorers::factor_pairs(const GVectors& gv, FactorType type, const std::vector<int>& i, const std::vector<int>& j,
                          const std::vector<int>& k) const {
  switch (type) {
    case FactorType::sib:
      return mul(take(gv.s, rows(i)), mul(take(gv.e, rows(j)), take(gv.e, rows(k))));
    case FactorType::cop:
      return mul(mul(take(gv.s, rows(i)), take(gv.s, rows(j))), take(gv.e, rows(k)));
    case FactorType::gp:
      return mul(mul(take(gv.s, rows(i)), take(gv.mid, rows(j))), take(gv.e, rows(k)));
  }
  throw std::invalid_argument("unknown factor type");
}

PotentialVars Scorers::score(Graph& g, Var z, const schema::InstanceGraph& graph,
                             const schema::FactorIndex& index) const {
  PotentialVars pot = score_unary(g, z, graph);
  add_factor_blocks(pot, graph, index);
  const Layout& l = pot.layout;

  struct Nodes {
    std::array<std::vector<int>, 3> ijk;
  };
  std::vector<Nodes> nodes(pot.binary.size());
  std::map<FactorType, std::array<std::vector<int>, 3>> used;  // per type: rows read by s, e, mid
  for (std::size_t bi = 0; bi < pot.binary.size(); ++bi) {
    const auto& b = pot.binary[bi];
    if (!binary_g_.count(b.type) || !cases_.has(b.kind)) {
      throw std::invalid_argument(std::string("no scorer for binary case ") + schema::to_string(b.kind));
    }
    const std::size_t f = b.first.size();
    auto& [vi, vj, vk] = nodes[bi].ijk;
    vi.resize(f), vj.resize(f), vk.resize(f);
    for (std::size_t x = 0; x < f; ++x) {
      const auto& e1 = graph.edges[static_cast<std::size_t>(l.edges[task_slot(b.first_task)][static_cast<std::size_t>(b.first[x])])];
      const auto& e2 = graph.edges[static_cast<std::size_t>(l.edges[task_slot(b.second_task)][static_cast<std::size_t>(b.second[x])])];
      switch (b.type) {
        case FactorType::sib: vi[x] = e1.head; vj[x] = e1.tail; vk[x] = e2.tail; break;
        case FactorType::cop: vi[x] = e1.head; vj[x] = e2.head; vk[x] = e1.tail; break;
        case FactorType::gp: vi[x] = e1.head; vj[x] = e1.tail; vk[x] = e2.tail; break;
      }
    }
    auto& u = used[b.type];
    for (int v = 0; v < 3; ++v) {
      auto& dst = u[static_cast<std::size_t>(kRole[static_cast<int>(b.type)][v])];
      dst.insert(dst.end(), nodes[bi].ijk[static_cast<std::size_t>(v)].begin(), nodes[bi].ijk[static_cast<std::size_t>(v)].end());
    }
  }
  std::map<FactorType, GVectors> gvs;
  for (auto& [type, u] : used) {
    std::array<Var, 3> zr;
    for (std::size_t r = 0; r < 3; ++r) {
      u[r] = distinct(std::move(u[r]));
      if (!u[r].empty()) zr[r] = take(z, rows(u[r]));
    }
    gvs[type] = binary_g(g, type, zr[0], zr[1], zr[2]);
  }
  for (std::size_t bi = 0; bi < pot.binary.size(); ++bi) {
    auto& b = pot.binary[bi];
    const std::size_t f = b.first.size();
    const auto& u = used[b.type];
    std::array<std::vector<int>, 3> local;
    for (std::size_t v = 0; v < 3; ++v) {
      local[v] = positions(nodes[bi].ijk[v], u[static_cast<std::size_t>(kRole[static_cast<int>(b.type)][v])]);
    }
    Var pairs = factor_pairs(gvs[b.type], b.type, local[0], local[1], local[2]);
    auto [h1, h2] = binary_tables(g, b.kind, b.type);
    Var lp = outer_rows(h1, h2);
    b.scores = reshape(matmul(pairs, lp, true), {f, h1.shape()[0], h2.shape()[0]});
  }

  for (auto& b : pot.ternary) {
    auto it = ternary_g_.find(b.kind);
    if (it == ternary_g_.end()) throw std::invalid_argument(std::string("no scorer for ternary case ") + schema::to_string(b.kind));
    const std::size_t f = b.edges.size();
    const std::size_t ts = task_slot(b.task);
    std::vector<int> heads(f), tails(f);
    for (std::size_t x = 0; x < f; ++x) {
      const auto& e = graph.edges[static_cast<std::size_t>(l.edges[ts][static_cast<std::size_t>(b.edges[x])])];
      heads[x] = e.head;
      tails[x] = e.tail;
    }
    Var gpair;
    if (config_.node_reps) {
      const std::string site = std::string("ternary.") + schema::to_string(b.kind);
      const auto hs = distinct(heads), tl = distinct(tails);
      Var gs = apply(g, it->second[0], take(z, rows(hs)), site + ".s");
      Var ge = apply(g, it->second[1], take(z, rows(tl)), site + ".e");
      gpair = mul(take(gs, rows(positions(heads, hs))), take(ge, rows(positions(tails, tl))));
    } else {
      gpair = g.constant(Tensor({f, config_.d4()}, 1.0));
    }
    auto [es, ee, h] = ternary_tables(g, b.kind);
    b.factors = {gpair, es, ee, h};
  }
  return pot;
}

double Scorers::binary_score(FactorType type, BinaryCase kind, const Tensor& zi, const Tensor& zj, const Tensor& zk,
                             int m, int n) const {
  if (!schema::binary_allows(kind, type)) throw std::invalid_argument("factor type not allowed in this case");
  if (!binary_g_.count(type) || !cases_.has(kind)) throw std::invalid_argument("no scorer for this binary case");
  Graph g(RunMode::eval);
  const std::size_t w = input_width_;
  for (const Tensor* z : {&zi, &zj, &zk})
    if (z->size() != w) throw ShapeError("node representation width mismatch");
  std::vector<double> data;
  for (const Tensor* z : {&zi, &zj, &zk}) data.insert(data.end(), z->data().begin(), z->data().end());
  Var zs = g.constant(Tensor({3, w}, std::move(data)));
  GVectors gv = binary_g(g, type, zs, zs, zs);
  Var pair = factor_pairs(gv, type, {0}, {1}, {2});
  auto [h1, h2] = binary_tables(g, kind, type);
  if (m < 0 || n < 0 || static_cast<std::size_t>(m) >= h1.shape()[0] || static_cast<std::size_t>(n) >= h2.shape()[0]) {
    throw std::out_of_range("label id out of range");
  }
  Var lp = mul(take(h1, {static_cast<std::size_t>(m)}), take(h2, {static_cast<std::size_t>(n)}));
  return matmul(pair, lp, true).value().item();
}

double Scorers::ternary_score(TernaryCase kind, const Tensor& zi, const Tensor& zj, int p, int q, int m) const {
  auto it = ternary_g_.find(kind);
  if (it == ternary_g_.end()) throw std::invalid_argument("no scorer for this ternary case");
  Graph g(RunMode::eval);
  const std::size_t w = input_width_;
  if (zi.size() != w || zj.size() != w) throw ShapeError("node representation width mismatch");
  Var gi, gj;
  if (config_.node_reps) {
    gi = apply_nodrop(g, it->second[0], g.constant(zi.reshaped({1, w})));
    gj = apply_nodrop(g, it->second[1], g.constant(zj.reshaped({1, w})));
  } else {
    gi = gj = g.constant(Tensor({1, config_.d4()}, 1.0));
  }
  auto [es, ee, h] = ternary_tables(g, kind);
  auto check = [](int id, Var t) {
    if (id < 0 || static_cast<std::size_t>(id) >= t.shape()[0]) throw std::out_of_range("label id out of range");
    return static_cast<std::size_t>(id);
  };
  Var labels = mul(mul(take(es, {check(p, es)}), take(ee, {check(q, ee)})), take(h, {check(m, h)}));
  return matmul(mul(gi, gj), labels, true).value().item();
}

}  // namespace hoie::scoring
