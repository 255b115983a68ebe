#include "hoie/data/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>
#include <stdexcept>

#include "hoie/numerics/rng.hpp"

namespace hoie::data {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool contains(const std::vector<std::string>& v, const std::string& x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("synthetic schema: " + msg);
}

}  // namespace

void SyntheticSchema::validate() const {
  require(!(noise < 0.0 || noise >= 1.0), "noise must lie in [0, 1)");
  for (double p : {role_mask, relation_mask, hub_mask, entity_mask, trigger_mask, distractor_rate})
    require(p >= 0.0 && p <= 1.0, "mask and distractor rates must lie in [0, 1]");
  require(words_per_type > 0 && max_tails > 0 && max_fillers >= 0, "word, tail and filler counts must be positive");
  require(!event_types.empty() && !entity_types.empty() && !roles.empty() && !relations.empty(), "type inventories must be non-empty");
  for (const auto& s : symmetric_relations) require(contains(relations, s), "undeclared symmetric relation " + s);
  for (const auto& ev : event_types) {
    auto it = legal_roles.find(ev);
    require(it != legal_roles.end() && !it->second.empty(), "event type " + ev + " has no legal roles");
  }
  for (const auto& [ev, rs] : legal_roles) {
    require(contains(event_types, ev), "undeclared event type " + ev);
    for (const auto& r : rs) require(contains(roles, r), "undeclared role " + r);
  }
  for (const auto& ev : event_types) {
    const bool has = std::any_of(frames.begin(), frames.end(), [&](const RoleFrame& f) { return f.event == ev; });
    require(has, "event type " + ev + " has no role frame");
  }
  for (const auto& f : frames) {
    require(contains(event_types, f.event), "frame for undeclared event " + f.event);
    const auto& legal = legal_roles.at(f.event);
    require(contains(legal, f.first) && contains(legal, f.second), "frame roles must be legal for " + f.event);
  }
  for (const auto& c : compatibility) {
    require(contains(entity_types, c.head_type) && contains(entity_types, c.tail_type), "compatibility uses an undeclared entity type");
    require(contains(relations, c.relation), "compatibility uses undeclared relation " + c.relation);
  }
  require(!hub_types.empty(), "no hub types");
  for (const auto& h : hub_types) {
    require(contains(entity_types, h), "undeclared hub type " + h);
    bool any = false;
    for (const auto& t : entity_types) any = any || !compatible(h, t).empty();
    require(any, "hub type " + h + " has no compatible tail");
  }
}

schema::LabelSchema SyntheticSchema::label_schema() const {
  return schema::LabelSchema::make(event_types, entity_types, roles, relations, symmetric_relations);
}

std::vector<std::string> SyntheticSchema::compatible(const std::string& head, const std::string& tail) const {
  std::vector<std::string> out;
  for (const auto& c : compatibility)
    if (c.head_type == head && c.tail_type == tail) out.push_back(c.relation);
  return out;
}

SyntheticSchema default_synthetic_schema() {
  SyntheticSchema s;
  s.event_types = {"Attack", "Transport", "Die", "Meet"};
  s.entity_types = {"PER", "ORG", "GPE", "LOC", "FAC"};
  s.roles = {"Agent", "Target", "Place"};
  s.relations = {"PER-SOC", "ORG-AFF", "GEN-AFF", "PART-WHOLE", "PHYS"};
  s.symmetric_relations = {"PER-SOC"};
  for (const auto& ev : s.event_types) s.legal_roles[ev] = s.roles;
  s.frames = {{"Attack", "Agent", "Target"}, {"Transport", "Agent", "Place"}, {"Die", "Target", "Place"}, {"Meet", "Agent", "Agent"}};
  // For every tail type the three hub types use three different relations.
  s.compatibility = {
      {"PER", "PER-SOC", "PER"}, {"ORG", "ORG-AFF", "PER"},    {"GPE", "GEN-AFF", "PER"},
      {"PER", "ORG-AFF", "ORG"}, {"ORG", "PART-WHOLE", "ORG"}, {"GPE", "GEN-AFF", "ORG"},
      {"PER", "GEN-AFF", "GPE"}, {"ORG", "PHYS", "GPE"},       {"GPE", "PART-WHOLE", "GPE"},
      {"PER", "PHYS", "LOC"},    {"ORG", "GEN-AFF", "LOC"},    {"GPE", "PART-WHOLE", "LOC"},
      {"PER", "PHYS", "FAC"},    {"ORG", "ORG-AFF", "FAC"},    {"GPE", "PART-WHOLE", "FAC"},
  };

  s.hub_types = {"PER", "ORG", "GPE"};
  return s;
}

namespace {

struct Writer {
  const SyntheticSchema& s;
  Rng& rng;
  DatasetRecord r;

  bool coin(double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }
  int below(std::size_t n) { return static_cast<int>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)); }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(below(v.size()))]; }
  std::string word(const std::string& stem) { return stem + "_" + std::to_string(below(static_cast<std::size_t>(s.words_per_type))); }

  void push(std::string w) { r.tokens.push_back(std::move(w)); }
  void fillers() {
    const int k = s.max_fillers == 0 ? 0 : below(static_cast<std::size_t>(s.max_fillers + 1));
    for (int i = 0; i < k; ++i) push(word("w"));
  }
  int entity(const std::string& type, bool masked) {
    const int start = static_cast<int>(r.tokens.size());
    const int len = coin(0.3) ? 2 : 1;
    for (int i = 0; i < len; ++i) push(word(masked ? "ent" : lower(type)));
    r.entities.push_back({start, start + len - 1, type});
    push(",");
    return static_cast<int>(r.entities.size()) - 1;
  }
};

}  // namespace

std::vector<DatasetRecord> generate_synthetic(const SyntheticSchema& s, std::uint64_t seed, std::size_t n) {
  if (n == 0) throw std::invalid_argument("generate_synthetic needs n > 0");
  s.validate();
  std::vector<DatasetRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    Writer w{s, rng, {}};
    w.r.id = "syn-" + std::to_string(seed) + "-" + std::to_string(i);

    // Event clause.
    w.fillers();
    const std::string& ev = w.pick(s.event_types);
    w.r.triggers.push_back({static_cast<int>(w.r.tokens.size()), static_cast<int>(w.r.tokens.size()), ev});
    w.push(w.word(w.coin(s.trigger_mask) ? "event" : lower(ev)));
    w.push(",");
    std::pair<std::string, std::string> roles;
    const auto& legal = s.legal_roles.at(ev);
    if (w.coin(s.noise)) {
      roles = {w.pick(legal), w.pick(legal)};
    } else {
      std::vector<const RoleFrame*> fs;
      for (const auto& f : s.frames)
        if (f.event == ev) fs.push_back(&f);
      const RoleFrame& f = *w.pick(fs);
      roles = {f.first, f.second};
    }
    Event event{0, {}};
    const bool swap = w.coin(0.5);
    for (int k = 0; k < 2; ++k) {
      const std::string& role = (k == 0) != swap ? roles.first : roles.second;
      w.push(w.coin(s.role_mask) ? "r_arg" : "r_" + lower(role));
      event.args.push_back({w.entity(w.pick(s.entity_types), w.coin(s.entity_mask)), role});
    }
    if (swap) std::swap(event.args[0], event.args[1]);
    w.r.events.push_back(std::move(event));
    w.push(".");

    // Hub clause.
    w.fillers();
    const std::string hub_type = w.pick(s.hub_types);
    w.push("@");
    const int hub = w.entity(hub_type, w.coin(s.hub_mask));
    const int tails = 1 + w.below(static_cast<std::size_t>(s.max_tails));
    for (int k = 0; k < tails; ++k) {
      std::vector<std::string> tail_types;
      for (const auto& t : s.entity_types)
        if (!s.compatible(hub_type, t).empty()) tail_types.push_back(t);
      const std::string tail_type = w.pick(tail_types);
      const std::string rel = w.coin(s.noise) ? w.pick(s.relations) : w.pick(s.compatible(hub_type, tail_type));
      w.push(w.coin(s.relation_mask) ? "rel" : "rel_" + lower(rel));
      const int tail = w.entity(tail_type, w.coin(s.entity_mask));
      w.r.relations.push_back({hub, tail, rel});
    }
    w.push(".");

    if (w.coin(s.distractor_rate)) {
      w.push("w_and");
      w.entity(w.pick(s.entity_types), w.coin(s.entity_mask));
      w.push(".");
    }
    validate(w.r);
    out.push_back(std::move(w.r));
  }
  return out;
}

ordered_json synthetic_schema_to_json(const SyntheticSchema& s) {
  ordered_json j;
  j["event_types"] = s.event_types;
  j["entity_types"] = s.entity_types;
  j["roles"] = s.roles;
  j["relations"] = s.relations;
  j["symmetric_relations"] = s.symmetric_relations;
  j["legal_roles"] = s.legal_roles;
  j["frames"] = ordered_json::array();
  for (const auto& f : s.frames) j["frames"].push_back({{"event", f.event}, {"first", f.first}, {"second", f.second}});
  j["compatibility"] = ordered_json::array();
  for (const auto& c : s.compatibility)
    j["compatibility"].push_back({{"head", c.head_type}, {"relation", c.relation}, {"tail", c.tail_type}});
  j["hub_types"] = s.hub_types;
  j["noise"] = s.noise;
  j["role_mask"] = s.role_mask;
  j["relation_mask"] = s.relation_mask;
  j["hub_mask"] = s.hub_mask;
  j["entity_mask"] = s.entity_mask;
  j["trigger_mask"] = s.trigger_mask;
  j["words_per_type"] = s.words_per_type;
  j["max_tails"] = s.max_tails;
  j["distractor_rate"] = s.distractor_rate;
  j["max_fillers"] = s.max_fillers;
  return j;
}

SyntheticSchema synthetic_schema_from_json(const json& j) {
  SyntheticSchema s = default_synthetic_schema();
  if (!j.is_object()) throw std::invalid_argument("synthetic schema must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "event_types") s.event_types = v.get<std::vector<std::string>>();
      else if (key == "entity_types") s.entity_types = v.get<std::vector<std::string>>();
      else if (key == "roles") s.roles = v.get<std::vector<std::string>>();
      else if (key == "relations") s.relations = v.get<std::vector<std::string>>();
      else if (key == "symmetric_relations") s.symmetric_relations = v.get<std::vector<std::string>>();
      else if (key == "legal_roles") s.legal_roles = v.get<std::map<std::string, std::vector<std::string>>>();
      else if (key == "frames") {
        s.frames.clear();
        for (const auto& f : v) s.frames.push_back({f.at("event"), f.at("first"), f.at("second")});
      } else if (key == "compatibility") {
        s.compatibility.clear();
        for (const auto& c : v) s.compatibility.push_back({c.at("head"), c.at("relation"), c.at("tail")});
      } else if (key == "hub_types") s.hub_types = v.get<std::vector<std::string>>();
      else if (key == "noise") s.noise = v.get<double>();
      else if (key == "role_mask") s.role_mask = v.get<double>();
      else if (key == "relation_mask") s.relation_mask = v.get<double>();
      else if (key == "hub_mask") s.hub_mask = v.get<double>();
      else if (key == "entity_mask") s.entity_mask = v.get<double>();
      else if (key == "trigger_mask") s.trigger_mask = v.get<double>();
      else if (key == "words_per_type") s.words_per_type = v.get<int>();
      else if (key == "max_tails") s.max_tails = v.get<int>();
      else if (key == "distractor_rate") s.distractor_rate = v.get<double>();
      else if (key == "max_fillers") s.max_fillers = v.get<int>();
      else throw std::invalid_argument("unknown synthetic schema key '" + key + "'");
    } catch (const json::exception& e) {
      throw std::invalid_argument("synthetic schema key '" + key + "': " + e.what());
    }
  }
  s.validate();
  return s;
}

}  // namespace hoie::data
