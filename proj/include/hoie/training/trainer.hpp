#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hoie/evaluation/metrics.hpp"
#include "hoie/identify/identifier.hpp"
#include "hoie/numerics/optimizer.hpp"
#include "hoie/training/labeler.hpp"

namespace hoie::train {

struct TrainConfig {
  std::size_t epochs = 80;
  std::size_t batch_size = 10;
  std::size_t warmup_epochs = 5;
  num::AdamWConfig optimizer;  // rates, decay and clip
  std::uint64_t seed = 0;      // batch order and dropout masks

  // Throws std::invalid_argument.
  void validate() const;
};

struct LossReport {
  std::array<double, 4> components{};  // trigger, entity, role, relation
  double total = 0.0;
  double grad_norm = 0.0;  // before clipping
};

struct EpochLog {
  std::size_t epoch = 0;
  LossReport loss;  // summed over the epoch's batches; grad_norm is the mean
  double dev_score = 0.0;
  bool best = false;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  double best_dev = -1.0;
  std::size_t steps = 0;
};

// Loss of example i on a fresh graph.
using ExampleLoss = std::function<JointLoss(num::Graph&, std::size_t)>;
// Higher is better.
using DevScore = std::function<double()>;
using EpochHook = std::function<void(const EpochLog&)>;

// Mini-batch AdamW over `examples`. Sentences of a batch build their graphs
// in parallel; their gradients are summed in batch order, so the result does
// not depend on the thread count. With a dev scorer, the parameters of the
// best-scoring epoch are restored at the end. Throws std::invalid_argument on
// an empty dataset and std::runtime_error on a non-finite loss.
TrainResult fit(num::ParameterStore& store, std::size_t examples, const ExampleLoss& loss, const TrainConfig& config,
                const DevScore& dev = {}, const EpochHook& on_epoch = {});

// One optimizer step over the given examples, starting from zeroed gradients; returns the batch report.
LossReport train_step(num::ParameterStore& store, num::AdamW& opt, const ExampleLoss& loss,
                      const std::vector<std::size_t>& batch, std::uint64_t seed, double lr_scale = 1.0);

std::vector<schema::InstanceGraph> predict_corpus(const Labeler& labeler, const std::vector<LabeledSentence>& data,
                                                  LossMode mode, const enc::ExternalEmbeddings* external = nullptr);
eval::MetricReport evaluate(const Labeler& labeler, const std::vector<LabeledSentence>& data, LossMode mode,
                            const enc::ExternalEmbeddings* external = nullptr);

TrainResult train_labeler(Labeler& labeler, num::ParameterStore& store, const std::vector<LabeledSentence>& train,
                          const std::vector<LabeledSentence>& dev, const TrainConfig& config,
                          const enc::ExternalEmbeddings* external = nullptr, const EpochHook& on_epoch = {});

// Gold spans of a labelled graph, as identifier targets.
ident::IdentifiedSpans gold_spans(const schema::InstanceGraph& graph);
// Identified spans as graph nodes (triggers first, then entities, typed by the
// identifier) with every candidate edge left unlabelled.
schema::InstanceGraph identified_graph(const ident::IdentifiedSpans& spans, const std::string& id,
                                       const std::vector<std::string>& tokens, const schema::LabelSchema& schema);
// Gold node labels by exact span match (kUnknownLabel otherwise); edges get the
// gold label of the matching (head span, tail span) pair, NULL when none.
void transfer_gold(schema::InstanceGraph& graph, const schema::InstanceGraph& gold);

TrainResult train_identifier(const ident::Identifier& identifier, num::ParameterStore& store,
                             const std::vector<LabeledSentence>& train, const std::vector<LabeledSentence>& dev,
                             const TrainConfig& config, const schema::LabelSchema& schema,
                             const enc::ExternalEmbeddings* external = nullptr, const EpochHook& on_epoch = {});
// Ent + Trig-C pooled span F1 of the identifier on `data`.
double identifier_f1(const ident::Identifier& identifier, const std::vector<LabeledSentence>& data,
                     const schema::LabelSchema& schema, const enc::ExternalEmbeddings* external = nullptr);

}  // namespace hoie::train

namespace hoie::train {

// Sentences per second.
struct Throughput {
  double train = 0.0;
  double test = 0.0;
};

// Times whole-batch train steps (loss, backward, update) and predict_corpus
// over `batch`, each repeated until `min_seconds` have elapsed; the rate comes
// from the fastest repetition.
Throughput measure_throughput(const Labeler& labeler, num::ParameterStore& store,
                              const std::vector<LabeledSentence>& batch, double min_seconds = 0.5);

}  // namespace hoie::train
