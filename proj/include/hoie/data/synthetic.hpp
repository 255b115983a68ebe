#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hoie/data/dataset.hpp"

namespace hoie::data {

// Preferred (first, second) role pair of the two arguments of an event.
struct RoleFrame {
  std::string event;
  std::string first;
  std::string second;
};

// A relation the generator may place from a head of one type to a tail of another.
struct Compatibility {
  std::string head_type;
  std::string relation;
  std::string tail_type;
};

// Each sentence holds one event clause (a trigger with two cued arguments),
// one hub clause (an entity marked by the hub slot token and 1..max_tails
// related entities, each behind a relation cue) and optionally a distractor
// entity. Every mention is followed by a separator, so an item's context
// window covers its own cue only.
struct SyntheticSchema {
  std::vector<std::string> event_types;
  std::vector<std::string> entity_types;
  std::vector<std::string> roles;
  std::vector<std::string> relations;
  std::vector<std::string> symmetric_relations;
  std::map<std::string, std::vector<std::string>> legal_roles;  // event type -> roles
  std::vector<RoleFrame> frames;                                 // one per event type
  std::vector<Compatibility> compatibility;
  std::vector<std::string> hub_types;
  double noise = 0.1;  // rate at which a role pair or relation ignores the rules

  // Surface knobs: probability that the type-revealing token is replaced by a generic one.
  double role_mask = 0.5;
  double relation_mask = 0.5;
  double hub_mask = 0.8;
  double entity_mask = 0.1;
  double trigger_mask = 0.0;
  int words_per_type = 4;
  int max_tails = 3;
  double distractor_rate = 0.5;
  int max_fillers = 2;

  // Throws std::invalid_argument on undeclared types, a noise rate outside
  // [0, 1), or rules that leave a hub type with no compatible tail.
  void validate() const;
  schema::LabelSchema label_schema() const;
  // Relations allowed for a (head type, tail type) pair.
  std::vector<std::string> compatible(const std::string& head, const std::string& tail) const;
};

SyntheticSchema default_synthetic_schema();

// Throws std::invalid_argument when n == 0 or the schema is invalid.
std::vector<DatasetRecord> generate_synthetic(const SyntheticSchema& schema, std::uint64_t seed, std::size_t n);

nlohmann::ordered_json synthetic_schema_to_json(const SyntheticSchema& s);
// Keys missing from `j` keep their default_synthetic_schema() values.
SyntheticSchema synthetic_schema_from_json(const nlohmann::json& j);

}  // namespace hoie::data
