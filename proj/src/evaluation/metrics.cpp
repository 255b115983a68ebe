#include "hoie/evaluation/metrics.hpp"

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hoie::eval {

using schema::EdgeTask;
using schema::InstanceGraph;
using schema::NodeKind;

const char* to_string(Metric m) {
  switch (m) {
    case Metric::ent: return "Ent";
    case Metric::rel: return "Rel";
    case Metric::rel_plus: return "Rel+";
    case Metric::trig_i: return "Trig-I";
    case Metric::trig_c: return "Trig-C";
    case Metric::arg_i: return "Arg-I";
    case Metric::arg_c: return "Arg-C";
  }
  return "?";
}

MetricReport& MetricReport::operator+=(const MetricReport& o) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  return *this;
}

double MetricReport::edge_f1() const {
  Counts c = (*this)[Metric::arg_c];
  c += (*this)[Metric::rel];
  return c.f1();
}

std::string MetricReport::to_json(int indent) const {
  nlohmann::ordered_json j;
  for (Metric m : kMetrics) {
    const Counts& c = (*this)[m];
    j[to_string(m)] = {{"tp", c.tp},          {"predicted", c.predicted}, {"gold", c.gold},
                       {"p", c.precision()}, {"r", c.recall()},          {"f1", c.f1()}};
  }
  return j.dump(indent);
}

namespace {

using Key = std::vector<int>;
using Keys = std::array<std::vector<Key>, 7>;

Keys collect(const InstanceGraph& g, const schema::LabelSchema& schema, bool dedupe_symmetric) {
  Keys k;
  auto at = [&](Metric m) -> std::vector<Key>& { return k[static_cast<std::size_t>(m)]; };
  for (const auto& n : g.nodes) {
    if (n.label < 0) continue;
    if (n.kind == NodeKind::entity) {
      at(Metric::ent).push_back({n.span.start, n.span.end, n.label});
    } else {
      at(Metric::trig_i).push_back({n.span.start, n.span.end});
      at(Metric::trig_c).push_back({n.span.start, n.span.end, n.label});
    }
  }
  std::set<Key> seen;
  for (const auto& e : g.edges) {
    if (e.label <= 0) continue;
    const auto& h = g.nodes.at(static_cast<std::size_t>(e.head));
    const auto& t = g.nodes.at(static_cast<std::size_t>(e.tail));
    if (e.task == EdgeTask::role) {
      at(Metric::arg_i).push_back({t.span.start, t.span.end, h.label});
      at(Metric::arg_c).push_back({t.span.start, t.span.end, h.label, e.label});
      continue;
    }
    Key a{h.span.start, h.span.end, h.label}, b{t.span.start, t.span.end, t.label};
    if (schema.is_symmetric(e.label) && b < a) std::swap(a, b);
    Key rel{a[0], a[1], b[0], b[1], e.label};
    if (schema.is_symmetric(e.label) && dedupe_symmetric && !seen.insert(rel).second) continue;
    at(Metric::rel).push_back(rel);
    at(Metric::rel_plus).push_back({a[0], a[1], b[0], b[1], e.label, a[2], b[2]});
  }
  return k;
}

Counts match(const std::vector<Key>& pred, const std::vector<Key>& gold) {
  std::map<Key, long> pool;
  for (const auto& k : gold) ++pool[k];
  Counts c;
  c.predicted = static_cast<long>(pred.size());
  c.gold = static_cast<long>(gold.size());
  for (const auto& k : pred) {
    auto it = pool.find(k);
    if (it != pool.end() && it->second > 0) {
      --it->second;
      ++c.tp;
    }
  }
  return c;
}

}  // namespace

MetricReport score_sentence(const InstanceGraph& pred, const InstanceGraph& gold, const schema::LabelSchema& schema) {
  if (pred.id != gold.id) throw std::invalid_argument("prediction '" + pred.id + "' aligned with gold '" + gold.id + "'");
  const Keys p = collect(pred, schema, true);
  const Keys g = collect(gold, schema, false);
  MetricReport r;
  for (std::size_t i = 0; i < 7; ++i) r.counts[i] = match(p[i], g[i]);
  return r;
}

MetricReport score_corpus(const std::vector<InstanceGraph>& pred, const std::vector<InstanceGraph>& gold,
                          const schema::LabelSchema& schema) {
  if (pred.size() != gold.size()) {
    throw std::invalid_argument("prediction count " + std::to_string(pred.size()) + " differs from gold count " +
                                std::to_string(gold.size()));
  }
  MetricReport r;
  for (std::size_t i = 0; i < pred.size(); ++i) r += score_sentence(pred[i], gold[i], schema);
  return r;
}

ErrorTask parse_error_task(const std::string& name) {
  if (name == "entity") return ErrorTask::entity;
  if (name == "trigger") return ErrorTask::trigger;
  if (name == "relation") return ErrorTask::relation;
  if (name == "role") return ErrorTask::role;
  throw std::invalid_argument("unknown error-matrix task '" + name + "' (expected entity, trigger, relation or role)");
}

namespace {

using Confusion = std::map<std::pair<std::string, std::string>, long>;

// Item identity -> label name, for the items of one task in one sentence.
std::map<Key, std::string> items(const InstanceGraph& g, const schema::LabelSchema& schema, ErrorTask task) {
  std::map<Key, std::string> out;
  if (task == ErrorTask::entity || task == ErrorTask::trigger) {
    const NodeKind kind = task == ErrorTask::entity ? NodeKind::entity : NodeKind::trigger;
    for (const auto& n : g.nodes)
      if (n.kind == kind && n.label >= 0) out.emplace(Key{n.span.start, n.span.end}, schema.nodes(kind).name(n.label));
    return out;
  }
  const EdgeTask t = task == ErrorTask::role ? EdgeTask::role : EdgeTask::relation;
  for (const auto& e : g.edges) {
    if (e.task != t || e.label <= 0) continue;
    auto h = g.nodes.at(static_cast<std::size_t>(e.head)).span;
    auto s = g.nodes.at(static_cast<std::size_t>(e.tail)).span;
    if (t == EdgeTask::relation && schema.is_symmetric(e.label) && s < h) std::swap(h, s);
    out.emplace(Key{h.start, h.end, s.start, s.end}, schema.edges(t).name(e.label));
  }
  return out;
}

void tally(Confusion& c, const std::map<Key, std::string>& pred, const std::map<Key, std::string>& gold) {
  const std::string null(schema::kNull);
  for (const auto& [k, g] : gold) {
    auto it = pred.find(k);
    ++c[{g, it == pred.end() ? null : it->second}];
  }
  for (const auto& [k, p] : pred)
    if (!gold.count(k)) ++c[{null, p}];
}

}  // namespace

std::string error_matrix(const std::vector<InstanceGraph>& pred_a, const std::vector<InstanceGraph>& pred_b,
                         const std::vector<InstanceGraph>& gold, const schema::LabelSchema& schema, ErrorTask task) {
  if (pred_a.size() != gold.size() || pred_b.size() != gold.size()) {
    throw std::invalid_argument("error_matrix needs both prediction sets aligned with gold");
  }
  Confusion a, b;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (pred_a[i].id != gold[i].id || pred_b[i].id != gold[i].id) {
      throw std::invalid_argument("sentence ids differ at position " + std::to_string(i));
    }
    const auto g = items(gold[i], schema, task);
    tally(a, items(pred_a[i], schema, task), g);
    tally(b, items(pred_b[i], schema, task), g);
  }
  std::set<std::pair<std::string, std::string>> cells;
  for (const auto& [k, v] : a) cells.insert(k);
  for (const auto& [k, v] : b) cells.insert(k);
  std::ostringstream out;
  out << "gold,predicted,a,b,delta\n";
  for (const auto& cell : cells) {
    const long ca = a.count(cell) ? a.at(cell) : 0;
    const long cb = b.count(cell) ? b.at(cell) : 0;
    out << cell.first << ',' << cell.second << ',' << ca << ',' << cb << ',' << cb - ca << '\n';
  }
  return out.str();
}

}  // namespace hoie::eval
