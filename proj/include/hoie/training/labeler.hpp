#pragma once

#include <array>

#include "hoie/encoder/encoder.hpp"
#include "hoie/inference/mfvi.hpp"
#include "hoie/scoring/scorer.hpp"

namespace hoie::train {

// Fixed α come from the config; learned α are sigmoid(raw) parameters.
enum class AlphaMode { fixed, learned };

struct LabelerConfig {
  enc::EncoderConfig encoder;
  scoring::ScoringConfig scoring;
  schema::FactorCases cases;  // empty: first-order model
  infer::Schedule schedule;
  infer::AlphaConfig alphas;
  AlphaMode alpha_mode = AlphaMode::fixed;

  bool high_order() const { return !cases.empty(); }
  void validate() const;
};

// A sentence with its gold graph: nodes are triggers first, then entities;
// edges are every candidate with label 0 (NULL) where nothing is annotated.
struct LabeledSentence {
  enc::SentenceInput input;
  schema::InstanceGraph graph;
};

struct JointLoss {
  num::Var total;
  std::array<num::Var, 4> parts;  // trigger, entity, role, relation
};

enum class LossMode { first_order, high_order };

// -Σ log P(gold) over every variable with a known gold label. Node variables
// with kUnknownLabel are skipped; an edge without a gold label throws
// std::invalid_argument. `q` supplies the logits P is normalized from.
JointLoss joint_loss(const infer::PosteriorVars& q, const schema::InstanceGraph& gold, const scoring::Layout& layout);

// Span encoder plus scorers; decoding and the loss share one posterior path.
class Labeler {
 public:
  Labeler(const LabelerConfig& config, const schema::LabelSchema& schema, num::ParameterStore& store);

  const LabelerConfig& config() const noexcept { return config_; }
  const schema::LabelSchema& schema() const noexcept { return schema_; }
  const scoring::Scorers& scorers() const noexcept { return scorers_; }

  scoring::PotentialVars potentials(num::Graph& g, const enc::SentenceInput& input, const schema::InstanceGraph& graph,
                                    const enc::ExternalEmbeddings* external = nullptr) const;
  infer::AlphaVars alphas(num::Graph& g) const;
  infer::AlphaConfig alpha_values() const;
  // High-order: run_mfvi. First-order: unary softmax.
  infer::PosteriorVars posteriors(num::Graph& g, const scoring::PotentialVars& pot, LossMode mode) const;

  JointLoss loss(num::Graph& g, const LabeledSentence& s, const enc::ExternalEmbeddings* external = nullptr) const;
  JointLoss loss(num::Graph& g, const LabeledSentence& s, LossMode mode,
                 const enc::ExternalEmbeddings* external = nullptr) const;

  // Labels every node and edge of `graph` (its labels are ignored). NULL-labelled edges stay in the graph.
  schema::InstanceGraph predict(const enc::SentenceInput& input, const schema::InstanceGraph& graph,
                                const enc::ExternalEmbeddings* external = nullptr) const;
  schema::InstanceGraph predict(const enc::SentenceInput& input, const schema::InstanceGraph& graph, LossMode mode,
                                const enc::ExternalEmbeddings* external = nullptr) const;
  // Per-variable argmax of the unary softmax.
  schema::InstanceGraph first_order_predict(const enc::SentenceInput& input, const schema::InstanceGraph& graph,
                                            const enc::ExternalEmbeddings* external = nullptr) const {
    return predict(input, graph, LossMode::first_order, external);
  }

  LossMode default_mode() const { return config_.high_order() ? LossMode::high_order : LossMode::first_order; }

 private:
  LabelerConfig config_;
  schema::LabelSchema schema_;
  schema::FactorCases cases_;
  enc::TokenEncoder encoder_;
  scoring::Scorers scorers_;
  std::array<num::Parameter*, 7> raw_alpha_{};
};

// Copies the decoded labels into `graph`.
void apply_assignment(schema::InstanceGraph& graph, const scoring::Layout& layout, const infer::Assignment& x);

}  // namespace hoie::train
