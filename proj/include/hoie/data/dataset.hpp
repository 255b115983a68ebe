#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "hoie/schema/instance.hpp"

namespace hoie::data {

struct EntityMention {
  int start = 0;
  int end = 0;  // inclusive
  std::string type;
  bool operator==(const EntityMention&) const = default;
};

struct TriggerMention {
  int start = 0;
  int end = 0;
  std::string event_type;
  bool operator==(const TriggerMention&) const = default;
};

struct Relation {
  int head = 0;  // entity index
  int tail = 0;
  std::string type;
  bool operator==(const Relation&) const = default;
};

struct Argument {
  int entity = 0;
  std::string role;
  bool operator==(const Argument&) const = default;
};

struct Event {
  int trigger = 0;
  std::vector<Argument> args;
  bool operator==(const Event&) const = default;
};

struct DatasetRecord {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<EntityMention> entities;
  std::vector<TriggerMention> triggers;
  std::vector<Relation> relations;
  std::vector<Event> events;
  bool operator==(const DatasetRecord&) const = default;
};

// Errors carry "<path>:<line>: " when they come from a file.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural checks: spans in range, indices valid, no duplicate relation
// (head, tail, type). Throws DataError.
void validate(const DatasetRecord& r);

nlohmann::ordered_json to_json(const DatasetRecord& r);
// Throws DataError on a missing or mistyped field and on an invalid record.
DatasetRecord record_from_json(const nlohmann::json& j);

std::vector<DatasetRecord> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records);

// Gold graph: triggers first, then entities; every candidate edge, NULL where
// unannotated. Throws DataError on a label the schema does not know.
schema::InstanceGraph to_graph(const DatasetRecord& r, const schema::LabelSchema& schema);
// Nodes with kUnknownLabel and edges labelled NULL are dropped.
DatasetRecord to_record(const schema::InstanceGraph& g, const schema::LabelSchema& schema);

// Label sets made of every type the records use, in first-seen order.
schema::LabelSchema infer_schema(const std::vector<DatasetRecord>& records, const std::vector<std::string>& symmetric = {});

nlohmann::ordered_json schema_to_json(const schema::LabelSchema& s);
schema::LabelSchema schema_from_json(const nlohmann::json& j);
schema::LabelSchema load_schema(const std::string& path);
void save_schema(const std::string& path, const schema::LabelSchema& s);

}  // namespace hoie::data
