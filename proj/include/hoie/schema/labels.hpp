#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hoie::schema {

inline constexpr std::string_view kNull = "NULL";

// Ordered list of label names with stable integer ids.
class LabelSet {
 public:
  LabelSet() = default;
  // Throws std::invalid_argument on duplicate names.
  explicit LabelSet(std::vector<std::string> names);
  // Edge label sets: NULL is prepended at id 0.
  static LabelSet with_null(const std::vector<std::string>& names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(int id) const;
  std::optional<int> find(std::string_view name) const;
  // Throws std::invalid_argument for unknown names.
  int id(std::string_view name) const;
  bool has_null() const noexcept { return !names_.empty() && names_[0] == kNull; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool operator==(const LabelSet& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int, std::less<>> ids_;
};

enum class NodeKind { trigger, entity };
enum class EdgeTask { role, relation };

const char* to_string(NodeKind k);
const char* to_string(EdgeTask t);

struct LabelSchema {
  LabelSet event;     // trigger node labels
  LabelSet entity;    // entity node labels
  LabelSet role;      // NULL first
  LabelSet relation;  // NULL first
  // Relation types whose direction carries no meaning; ids into `relation`.
  std::vector<int> symmetric_relations;

  static LabelSchema make(std::vector<std::string> events, std::vector<std::string> entities,
                          const std::vector<std::string>& roles, const std::vector<std::string>& relations,
                          const std::vector<std::string>& symmetric = {});

  const LabelSet& nodes(NodeKind k) const { return k == NodeKind::trigger ? event : entity; }
  const LabelSet& edges(EdgeTask t) const { return t == EdgeTask::role ? role : relation; }
  bool is_symmetric(int relation_id) const;

  bool operator==(const LabelSchema&) const = default;
};

}  // namespace hoie::schema
