#include "hoie/schema/instance.hpp"

namespace hoie::schema {

std::vector<EdgeInstance> candidate_edges(const std::vector<NodeInstance>& nodes, const LabelSchema&) {
  std::vector<EdgeInstance> edges;
  const int n = static_cast<int>(nodes.size());
  for (int i = 0; i < n; ++i) {
    const NodeKind hk = nodes[static_cast<std::size_t>(i)].kind;
    for (int j = 0; j < n; ++j) {
      if (i == j || nodes[static_cast<std::size_t>(j)].kind != NodeKind::entity) continue;
      edges.push_back({i, j, hk == NodeKind::trigger ? EdgeTask::role : EdgeTask::relation, kUnknownLabel});
    }
  }
  return edges;
}

}  // namespace hoie::schema
