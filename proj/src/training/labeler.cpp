#include "hoie/training/labeler.hpp"

#include <cmath>
#include <stdexcept>

namespace hoie::train {

using namespace hoie::num;
using scoring::Layout;
using schema::InstanceGraph;

void LabelerConfig::validate() const {
  encoder.validate();
  scoring.validate();
  alphas.validate();
  if (schedule.iterations < 0) throw std::invalid_argument("MFVI iterations must be >= 0");
}

namespace {

// -Σ_rows log_softmax(logits)[row, gold[row]] over rows with gold >= 0.
Var nll(Graph& g, Var logits, const std::vector<int>& gold) {
  const Tensor& v = logits.value();
  if (v.rank() != 2 || v.dim(0) == 0) return g.scalar(0.0);
  Tensor mask(v.shape());
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (gold[i] >= 0) mask.at(i, static_cast<std::size_t>(gold[i])) = 1.0;
  return neg(sum_all(mul(log_softmax(logits), g.constant(std::move(mask)))));
}

Graph& graph_of(const infer::PosteriorVars& q) {
  for (const Var& v : q.node_logits)
    if (v.valid()) return *v.graph;
  throw GraphError("posteriors are not bound to a graph");
}

}  // namespace

JointLoss joint_loss(const infer::PosteriorVars& q, const InstanceGraph& gold, const Layout& layout) {
  Graph& g = graph_of(q);
  JointLoss out;
  for (std::size_t s = 0; s < 2; ++s) {
    std::vector<int> labels;
    for (int id : layout.nodes[s]) {
      const int l = gold.nodes.at(static_cast<std::size_t>(id)).label;
      if (l >= static_cast<int>(q.node_logits[s].value().dim(1))) {
        throw std::invalid_argument("gold node label " + std::to_string(l) + " outside the label set");
      }
      labels.push_back(l);
    }
    out.parts[s] = nll(g, q.node_logits[s], labels);
  }
  for (std::size_t s = 0; s < 2; ++s) {
    std::vector<int> labels;
    for (int id : layout.edges[s]) {
      const auto& e = gold.edges.at(static_cast<std::size_t>(id));
      if (e.label < 0 || e.label >= static_cast<int>(q.edge_logits[s].value().dim(1))) {
        throw std::invalid_argument("sentence '" + gold.id + "': edge " + std::to_string(e.head) + "->" +
                                    std::to_string(e.tail) + " has no gold label");
      }
      labels.push_back(e.label);
    }
    out.parts[2 + s] = nll(g, q.edge_logits[s], labels);
  }
  out.total = add(add(add(out.parts[0], out.parts[1]), out.parts[2]), out.parts[3]);
  return out;
}

Labeler::Labeler(const LabelerConfig& config, const schema::LabelSchema& schema, ParameterStore& store)
    : config_(config), schema_(schema), cases_(config.cases), encoder_(config.encoder, store, "label.encoder") {
  config_.validate();
  scorers_ = scoring::Scorers(config_.scoring, schema_, cases_, config_.encoder.width, store);
  if (config_.alpha_mode == AlphaMode::learned) {
    auto& p = store.create("label.alpha", {7}, ParamGroup::other, Init::zeros);
    for (std::size_t i = 0; i < 7; ++i) {
      const double a = std::clamp(config_.alphas[i], 0.05, 0.95);
      p.value[i] = std::log(a / (1.0 - a));
    }
    for (auto& r : raw_alpha_) r = &p;
  }
}

infer::AlphaVars Labeler::alphas(Graph& g) const {
  if (config_.alpha_mode == AlphaMode::fixed) return infer::constant_alphas(g, config_.alphas);
  Var a = sigmoid(g.parameter(*raw_alpha_[0]));
  infer::AlphaVars out;
  for (std::size_t i = 0; i < 7; ++i) out[i] = reshape(take(a, {i}), {});
  return out;
}

infer::AlphaConfig Labeler::alpha_values() const {
  if (config_.alpha_mode == AlphaMode::fixed) return config_.alphas;
  infer::AlphaConfig out;
  for (std::size_t i = 0; i < 7; ++i) out[i] = 1.0 / (1.0 + std::exp(-raw_alpha_[0]->value[i]));
  return out;
}

scoring::PotentialVars Labeler::potentials(Graph& g, const enc::SentenceInput& input, const InstanceGraph& graph,
                                           const enc::ExternalEmbeddings* external) const {
  Var tokens = encoder_.encode(g, input, external);
  std::vector<schema::Span> spans;
  for (const auto& n : graph.nodes) spans.push_back(n.span);
  Var z = enc::span_representations(tokens, spans);
  if (!config_.high_order()) return scorers_.score_unary(g, z, graph);
  return scorers_.score(g, z, graph, schema::enumerate_factors(graph.edges, cases_));
}

infer::PosteriorVars Labeler::posteriors(Graph& g, const scoring::PotentialVars& pot, LossMode mode) const {
  if (mode == LossMode::first_order || !config_.high_order()) return infer::init_posteriors(pot);
  return infer::run_mfvi(pot, config_.schedule, alphas(g));
}

JointLoss Labeler::loss(Graph& g, const LabeledSentence& s, const enc::ExternalEmbeddings* external) const {
  return loss(g, s, default_mode(), external);
}

JointLoss Labeler::loss(Graph& g, const LabeledSentence& s, LossMode mode,
                        const enc::ExternalEmbeddings* external) const {
  if (s.graph.nodes.empty()) {
    JointLoss out;
    for (auto& p : out.parts) p = g.scalar(0.0);
    out.total = g.scalar(0.0);
    return out;
  }
  auto pot = potentials(g, s.input, s.graph, external);
  return joint_loss(posteriors(g, pot, mode), s.graph, pot.layout);
}

InstanceGraph Labeler::predict(const enc::SentenceInput& input, const InstanceGraph& graph,
                               const enc::ExternalEmbeddings* external) const {
  return predict(input, graph, default_mode(), external);
}

InstanceGraph Labeler::predict(const enc::SentenceInput& input, const InstanceGraph& graph, LossMode mode,
                               const enc::ExternalEmbeddings* external) const {
  InstanceGraph out = graph;
  if (graph.nodes.empty()) return out;
  Graph g(RunMode::eval);
  auto pot = potentials(g, input, graph, external);
  apply_assignment(out, pot.layout, infer::decode(infer::values(posteriors(g, pot, mode))));
  return out;
}

void apply_assignment(InstanceGraph& graph, const Layout& layout, const infer::Assignment& x) {
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t i = 0; i < x.node[s].size(); ++i)
      graph.nodes.at(static_cast<std::size_t>(layout.nodes[s][i])).label = x.node[s][i];
    for (std::size_t i = 0; i < x.edge[s].size(); ++i)
      graph.edges.at(static_cast<std::size_t>(layout.edges[s][i])).label = x.edge[s][i];
  }
}

}  // namespace hoie::train
