#pragma once

#include <array>
#include <string>
#include <vector>

#include "hoie/schema/instance.hpp"

namespace hoie::eval {

enum class Metric { ent, rel, rel_plus, trig_i, trig_c, arg_i, arg_c };
inline constexpr std::array<Metric, 7> kMetrics{Metric::ent,    Metric::rel,   Metric::rel_plus, Metric::trig_i,
                                                Metric::trig_c, Metric::arg_i, Metric::arg_c};
const char* to_string(Metric m);

struct Counts {
  long tp = 0;
  long predicted = 0;
  long gold = 0;

  double precision() const { return predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted); }
  double recall() const { return gold == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold); }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
  }
  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
};

struct MetricReport {
  std::array<Counts, 7> counts{};

  Counts& operator[](Metric m) { return counts[static_cast<std::size_t>(m)]; }
  const Counts& operator[](Metric m) const { return counts[static_cast<std::size_t>(m)]; }
  MetricReport& operator+=(const MetricReport& o);

  // Micro F1 over the pooled Arg-C and Rel counts: the edge-label score used for model selection.
  double edge_f1() const;
  std::string to_json(int indent = 2) const;
};

// Graphs are compared by node spans and labels; edges with label 0 (NULL)
// or kUnknownLabel are absent. `schema` supplies the symmetric relation types.
// Throws std::invalid_argument when sentence ids do not line up.
MetricReport score_sentence(const schema::InstanceGraph& pred, const schema::InstanceGraph& gold,
                            const schema::LabelSchema& schema);
MetricReport score_corpus(const std::vector<schema::InstanceGraph>& pred, const std::vector<schema::InstanceGraph>& gold,
                          const schema::LabelSchema& schema);

enum class ErrorTask { entity, trigger, relation, role };
// Throws std::invalid_argument for an unknown name.
ErrorTask parse_error_task(const std::string& name);

// Confusion counts of system b minus system a, one CSV row per (gold, predicted)
// label pair that is non-zero for either system: gold,predicted,a,b,delta.
// Missing items are NULL on either side; the NULL/NULL cell is never emitted.
std::string error_matrix(const std::vector<schema::InstanceGraph>& pred_a,
                         const std::vector<schema::InstanceGraph>& pred_b,
                         const std::vector<schema::InstanceGraph>& gold, const schema::LabelSchema& schema,
                         ErrorTask task);

}  // namespace hoie::eval
