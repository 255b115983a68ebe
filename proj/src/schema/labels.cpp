#include "hoie/schema/labels.hpp"

#include <algorithm>
#include <stdexcept>

namespace hoie::schema {

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!ids_.emplace(names_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate label name '" + names_[i] + "'");
    }
  }
}

LabelSet LabelSet::with_null(const std::vector<std::string>& names) {
  std::vector<std::string> all{std::string(kNull)};
  all.insert(all.end(), names.begin(), names.end());
  return LabelSet(std::move(all));
}

const std::string& LabelSet::name(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= names_.size()) {
    throw std::out_of_range("label id " + std::to_string(id) + " out of range");
  }
  return names_[static_cast<std::size_t>(id)];
}

std::optional<int> LabelSet::find(std::string_view name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

int LabelSet::id(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw std::invalid_argument("unknown label '" + std::string(name) + "'");
}

const char* to_string(NodeKind k) { return k == NodeKind::trigger ? "trigger" : "entity"; }
const char* to_string(EdgeTask t) { return t == EdgeTask::role ? "role" : "relation"; }

LabelSchema LabelSchema::make(std::vector<std::string> events, std::vector<std::string> entities,
                              const std::vector<std::string>& roles, const std::vector<std::string>& relations,
                              const std::vector<std::string>& symmetric) {
  LabelSchema s;
  s.event = LabelSet(std::move(events));
  s.entity = LabelSet(std::move(entities));
  s.role = LabelSet::with_null(roles);
  s.relation = LabelSet::with_null(relations);
  for (const auto& name : symmetric) s.symmetric_relations.push_back(s.relation.id(name));
  std::sort(s.symmetric_relations.begin(), s.symmetric_relations.end());
  return s;
}

bool LabelSchema::is_symmetric(int relation_id) const {
  return std::binary_search(symmetric_relations.begin(), symmetric_relations.end(), relation_id);
}

}  // namespace hoie::schema
