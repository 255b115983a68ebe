#pragma once

#include <string>
#include <vector>

#include "hoie/schema/labels.hpp"

namespace hoie::schema {

// Inclusive token offsets.
struct Span {
  int start = 0;
  int end = 0;

  int length() const noexcept { return end - start + 1; }
  bool valid_for(int sentence_length) const noexcept { return 0 <= start && start <= end && end < sentence_length; }
  auto operator<=>(const Span&) const = default;
};

inline constexpr int kUnknownLabel = -1;

struct NodeInstance {
  Span span;
  NodeKind kind = NodeKind::entity;
  int label = kUnknownLabel;
};

struct EdgeInstance {
  int head = 0;
  int tail = 0;
  EdgeTask task = EdgeTask::relation;
  int label = kUnknownLabel;  // 0 is NULL
};

// One sentence as a labeling problem: span nodes and every candidate edge.
struct InstanceGraph {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<NodeInstance> nodes;
  std::vector<EdgeInstance> edges;
};

// Role candidates: every (trigger, entity) pair. Relation candidates: every
// ordered (entity, entity) pair with distinct endpoints. Sorted by (head, tail).
std::vector<EdgeInstance> candidate_edges(const std::vector<NodeInstance>& nodes, const LabelSchema& schema);

}  // namespace hoie::schema
