#include "hoie/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

namespace hoie::data {

using nlohmann::json;
using nlohmann::ordered_json;
using schema::InstanceGraph;
using schema::NodeKind;

namespace {

void check_span(int start, int end, std::size_t n, const std::string& what) {
  if (start < 0 || end < start || end >= static_cast<int>(n)) {
    throw DataError(what + " span [" + std::to_string(start) + ", " + std::to_string(end) + "] is invalid for " +
                    std::to_string(n) + " tokens");
  }
}

void check_index(int i, std::size_t n, const std::string& what) {
  if (i < 0 || i >= static_cast<int>(n)) {
    throw DataError(what + " index " + std::to_string(i) + " out of range (" + std::to_string(n) + " items)");
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw DataError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw DataError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw DataError(where + " is missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(where + " field '" + key + "' has the wrong type");
  }
}

json array_field(const json& j, const char* key) {
  if (!j.contains(key)) return json::array();
  if (!j.at(key).is_array()) throw DataError(std::string("'") + key + "' must be an array");
  return j.at(key);
}

}  // namespace

void validate(const DatasetRecord& r) {
  const std::size_t n = r.tokens.size();
  if (r.id.empty()) throw DataError("record id is empty");
  for (const auto& e : r.entities) check_span(e.start, e.end, n, "entity");
  for (const auto& t : r.triggers) check_span(t.start, t.end, n, "trigger");
  std::set<std::tuple<int, int, std::string>> seen;
  for (const auto& rel : r.relations) {
    check_index(rel.head, r.entities.size(), "relation head");
    check_index(rel.tail, r.entities.size(), "relation tail");
    if (rel.head == rel.tail) throw DataError("relation links entity " + std::to_string(rel.head) + " to itself");
    if (!seen.emplace(rel.head, rel.tail, rel.type).second) {
      throw DataError("duplicate relation " + rel.type + " " + std::to_string(rel.head) + "->" + std::to_string(rel.tail));
    }
  }
  for (const auto& ev : r.events) {
    check_index(ev.trigger, r.triggers.size(), "event trigger");
    for (const auto& a : ev.args) check_index(a.entity, r.entities.size(), "argument entity");
  }
}

ordered_json to_json(const DatasetRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["tokens"] = r.tokens;
  j["entities"] = ordered_json::array();
  for (const auto& e : r.entities) j["entities"].push_back({{"start", e.start}, {"end", e.end}, {"type", e.type}});
  j["triggers"] = ordered_json::array();
  for (const auto& t : r.triggers)
    j["triggers"].push_back({{"start", t.start}, {"end", t.end}, {"event_type", t.event_type}});
  j["relations"] = ordered_json::array();
  for (const auto& rel : r.relations)
    j["relations"].push_back({{"head_entity_index", rel.head}, {"tail_entity_index", rel.tail}, {"type", rel.type}});
  j["events"] = ordered_json::array();
  for (const auto& ev : r.events) {
    ordered_json args = ordered_json::array();
    for (const auto& a : ev.args) args.push_back({{"entity_index", a.entity}, {"role", a.role}});
    j["events"].push_back({{"trigger_index", ev.trigger}, {"args", args}});
  }
  return j;
}

DatasetRecord record_from_json(const json& j) {
  check_keys(j, {"id", "tokens", "entities", "triggers", "relations", "events"}, "record");
  DatasetRecord r;
  r.id = field<std::string>(j, "id", "record");
  r.tokens = field<std::vector<std::string>>(j, "tokens", "record");
  for (const auto& e : array_field(j, "entities")) {
    check_keys(e, {"start", "end", "type"}, "entity");
    r.entities.push_back({field<int>(e, "start", "entity"), field<int>(e, "end", "entity"), field<std::string>(e, "type", "entity")});
  }
  for (const auto& t : array_field(j, "triggers")) {
    check_keys(t, {"start", "end", "event_type"}, "trigger");
    r.triggers.push_back(
        {field<int>(t, "start", "trigger"), field<int>(t, "end", "trigger"), field<std::string>(t, "event_type", "trigger")});
  }
  for (const auto& rel : array_field(j, "relations")) {
    check_keys(rel, {"head_entity_index", "tail_entity_index", "type"}, "relation");
    r.relations.push_back({field<int>(rel, "head_entity_index", "relation"), field<int>(rel, "tail_entity_index", "relation"),
                           field<std::string>(rel, "type", "relation")});
  }
  for (const auto& ev : array_field(j, "events")) {
    check_keys(ev, {"trigger_index", "args"}, "event");
    Event e{field<int>(ev, "trigger_index", "event"), {}};
    for (const auto& a : array_field(ev, "args")) {
      check_keys(a, {"entity_index", "role"}, "argument");
      e.args.push_back({field<int>(a, "entity_index", "argument"), field<std::string>(a, "role", "argument")});
    }
    r.events.push_back(std::move(e));
  }
  validate(r);
  return r;
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path);
  std::vector<DatasetRecord> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset " + path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

namespace {

int label_id(const schema::LabelSet& set, const std::string& name, const std::string& what) {
  auto id = set.find(name);
  if (!id) throw DataError("unknown " + what + " '" + name + "'");
  return *id;
}

}  // namespace

InstanceGraph to_graph(const DatasetRecord& r, const schema::LabelSchema& s) {
  validate(r);
  InstanceGraph g;
  g.id = r.id;
  g.tokens = r.tokens;
  const int nt = static_cast<int>(r.triggers.size());
  for (const auto& t : r.triggers)
    g.nodes.push_back({{t.start, t.end}, NodeKind::trigger, label_id(s.event, t.event_type, "event type")});
  for (const auto& e : r.entities) g.nodes.push_back({{e.start, e.end}, NodeKind::entity, label_id(s.entity, e.type, "entity type")});
  g.edges = schema::candidate_edges(g.nodes, s);
  for (auto& e : g.edges) e.label = 0;
  auto set = [&](int head, int tail, int label) {
    for (auto& e : g.edges)
      if (e.head == head && e.tail == tail) {
        e.label = label;
        return;
      }
  };
  for (const auto& rel : r.relations) set(nt + rel.head, nt + rel.tail, label_id(s.relation, rel.type, "relation type"));
  for (const auto& ev : r.events)
    for (const auto& a : ev.args) set(ev.trigger, nt + a.entity, label_id(s.role, a.role, "role"));
  return g;
}

DatasetRecord to_record(const InstanceGraph& g, const schema::LabelSchema& s) {
  DatasetRecord r;
  r.id = g.id;
  r.tokens = g.tokens;
  std::vector<int> index(g.nodes.size(), -1);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    if (n.label < 0) continue;
    if (n.kind == NodeKind::trigger) {
      index[i] = static_cast<int>(r.triggers.size());
      r.triggers.push_back({n.span.start, n.span.end, s.event.name(n.label)});
    } else {
      index[i] = static_cast<int>(r.entities.size());
      r.entities.push_back({n.span.start, n.span.end, s.entity.name(n.label)});
    }
  }
  std::vector<int> event_of(r.triggers.size(), -1);
  for (const auto& e : g.edges) {
    const int h = index[static_cast<std::size_t>(e.head)], t = index[static_cast<std::size_t>(e.tail)];
    if (e.label <= 0 || h < 0 || t < 0) continue;
    if (e.task == schema::EdgeTask::relation) {
      r.relations.push_back({h, t, s.relation.name(e.label)});
      continue;
    }
    auto& ev = event_of[static_cast<std::size_t>(h)];
    if (ev < 0) {
      ev = static_cast<int>(r.events.size());
      r.events.push_back({h, {}});
    }
    r.events[static_cast<std::size_t>(ev)].args.push_back({t, s.role.name(e.label)});
  }
  return r;
}

ordered_json schema_to_json(const schema::LabelSchema& s) {
  auto names = [](const schema::LabelSet& l, bool drop_null) {
    std::vector<std::string> v = l.names();
    if (drop_null && !v.empty()) v.erase(v.begin());
    return v;
  };
  std::vector<std::string> sym;
  for (int id : s.symmetric_relations) sym.push_back(s.relation.name(id));
  ordered_json j;
  j["event_types"] = names(s.event, false);
  j["entity_types"] = names(s.entity, false);
  j["roles"] = names(s.role, true);
  j["relations"] = names(s.relation, true);
  j["symmetric_relations"] = sym;
  return j;
}

schema::LabelSchema schema_from_json(const json& j) {
  check_keys(j, {"event_types", "entity_types", "roles", "relations", "symmetric_relations"}, "schema");
  try {
    return schema::LabelSchema::make(field<std::vector<std::string>>(j, "event_types", "schema"),
                                     field<std::vector<std::string>>(j, "entity_types", "schema"),
                                     field<std::vector<std::string>>(j, "roles", "schema"),
                                     field<std::vector<std::string>>(j, "relations", "schema"),
                                     j.value("symmetric_relations", std::vector<std::string>{}));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid schema: ") + e.what());
  }
}

schema::LabelSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema " + path);
  try {
    return schema_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed JSON: " + e.what());
  }
}

void save_schema(const std::string& path, const schema::LabelSchema& s) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write schema " + path);
  out << schema_to_json(s).dump(2) << '\n';
}

schema::LabelSchema infer_schema(const std::vector<DatasetRecord>& records, const std::vector<std::string>& symmetric) {
  std::vector<std::string> events, entities, roles, relations;
  auto note = [](std::vector<std::string>& v, const std::string& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  };
  for (const auto& r : records) {
    for (const auto& t : r.triggers) note(events, t.event_type);
    for (const auto& e : r.entities) note(entities, e.type);
    for (const auto& rel : r.relations) note(relations, rel.type);
    for (const auto& ev : r.events)
      for (const auto& a : ev.args) note(roles, a.role);
  }
  for (const auto& s : symmetric) note(relations, s);
  return schema::LabelSchema::make(events, entities, roles, relations, symmetric);
}

}  // namespace hoie::data
