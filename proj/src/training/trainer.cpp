#include "hoie/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "hoie/numerics/rng.hpp"

namespace hoie::train {

using namespace hoie::num;
using schema::InstanceGraph;
using schema::NodeKind;

void TrainConfig::validate() const {
  if (epochs == 0) throw std::invalid_argument("epochs must be > 0");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be > 0");
  if (optimizer.encoder.lr <= 0 || optimizer.other.lr <= 0) throw std::invalid_argument("learning rates must be > 0");
  if (optimizer.encoder.weight_decay < 0 || optimizer.other.weight_decay < 0) {
    throw std::invalid_argument("weight decay must be >= 0");
  }
  if (!(optimizer.clip > 0)) throw std::invalid_argument("gradient clip must be > 0");
}

LossReport train_step(ParameterStore& store, AdamW& opt, const ExampleLoss& loss, const std::vector<std::size_t>& batch,
                      std::uint64_t seed, double lr_scale) {
  const std::size_t b = batch.size();
  store.zero_grad();
  std::vector<ParamGradients> grads(b);
  std::vector<std::array<double, 5>> values(b);
  std::vector<std::exception_ptr> errors(b);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < b; ++k) {
    try {
      Graph g(RunMode::train, derive_seed(seed, batch[k]));
      JointLoss l = loss(g, batch[k]);
      for (std::size_t c = 0; c < 4; ++c) values[k][c] = l.parts[c].valid() ? l.parts[c].value()[0] : 0.0;
      values[k][4] = l.total.value()[0];
      g.backward(l.total, &grads[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }

  LossReport report;
  for (std::size_t k = 0; k < b; ++k) {
    if (errors[k]) {
      try {
        std::rethrow_exception(errors[k]);
      } catch (const NonFiniteError& e) {
        throw std::runtime_error("non-finite loss on example " + std::to_string(batch[k]) + ": " + e.what());
      }
    }
    for (std::size_t c = 0; c < 4; ++c) report.components[c] += values[k][c];
    report.total += values[k][4];
    if (!std::isfinite(values[k][4])) throw std::runtime_error("non-finite loss on example " + std::to_string(batch[k]));
    const double inv = 1.0 / static_cast<double>(b);
    for (auto& [p, g] : grads[k]) {
      auto dst = p->grad.data();
      auto src = g.data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += inv * src[i];
    }
  }
  report.grad_norm = opt.step(lr_scale);
  return report;
}

namespace {

struct Snapshot {
  std::vector<Tensor> values;

  static Snapshot take(const ParameterStore& store) {
    Snapshot s;
    for (const auto& p : store) s.values.push_back(p->value);
    return s;
  }
  void restore(ParameterStore& store) const {
    for (std::size_t i = 0; i < values.size(); ++i) {
      store[i].value = values[i];
      ++store[i].version;
    }
  }
};

}  // namespace

TrainResult fit(ParameterStore& store, std::size_t examples, const ExampleLoss& loss, const TrainConfig& config,
                const DevScore& dev, const EpochHook& on_epoch) {
  config.validate();
  if (examples == 0) throw std::invalid_argument("cannot train on an empty dataset");
  store.zero_grad();
  AdamW opt(store, config.optimizer);
  const std::size_t per_epoch = (examples + config.batch_size - 1) / config.batch_size;
  const std::size_t total = per_epoch * config.epochs;
  const std::size_t warmup = per_epoch * config.warmup_epochs;

  TrainResult result;
  Snapshot best;
  std::vector<std::size_t> order(examples);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(config.seed, epoch));
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.epoch = epoch + 1;
    for (std::size_t start = 0; start < examples; start += config.batch_size) {
      std::vector<std::size_t> batch(order.begin() + static_cast<long>(start),
                                     order.begin() + static_cast<long>(std::min(examples, start + config.batch_size)));
      const auto r = train_step(store, opt, loss, batch, derive_seed(config.seed, "dropout" + std::to_string(epoch)),
                                warmup_linear(result.steps, warmup, total));
      ++result.steps;
      for (std::size_t c = 0; c < 4; ++c) log.loss.components[c] += r.components[c];
      log.loss.total += r.total;
      log.loss.grad_norm += r.grad_norm / static_cast<double>(per_epoch);
    }
    if (dev) {
      log.dev_score = dev();
      if (log.dev_score > result.best_dev) {
        result.best_dev = log.dev_score;
        result.best_epoch = log.epoch;
        log.best = true;
        best = Snapshot::take(store);
      }
    }
    result.epochs.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  if (dev && !best.values.empty()) best.restore(store);
  return result;
}

std::vector<InstanceGraph> predict_corpus(const Labeler& labeler, const std::vector<LabeledSentence>& data,
                                          LossMode mode, const enc::ExternalEmbeddings* external) {
  std::vector<InstanceGraph> out(data.size());
  std::vector<std::exception_ptr> errors(data.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      out[i] = labeler.predict(data[i].input, data[i].graph, mode, external);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

eval::MetricReport evaluate(const Labeler& labeler, const std::vector<LabeledSentence>& data, LossMode mode,
                            const enc::ExternalEmbeddings* external) {
  std::vector<InstanceGraph> gold;
  for (const auto& s : data) gold.push_back(s.graph);
  return eval::score_corpus(predict_corpus(labeler, data, mode, external), gold, labeler.schema());
}

TrainResult train_labeler(Labeler& labeler, ParameterStore& store, const std::vector<LabeledSentence>& train,
                          const std::vector<LabeledSentence>& dev, const TrainConfig& config,
                          const enc::ExternalEmbeddings* external, const EpochHook& on_epoch) {
  auto loss = [&](Graph& g, std::size_t i) { return labeler.loss(g, train[i], external); };
  DevScore score;
  if (!dev.empty()) score = [&] { return evaluate(labeler, dev, labeler.default_mode(), external).edge_f1(); };
  return fit(store, train.size(), loss, config, score, on_epoch);
}

ident::IdentifiedSpans gold_spans(const InstanceGraph& graph) {
  ident::IdentifiedSpans out;
  for (const auto& n : graph.nodes) (n.kind == NodeKind::trigger ? out.triggers : out.entities).emplace_back(n.span, n.label);
  return out;
}

InstanceGraph identified_graph(const ident::IdentifiedSpans& spans, const std::string& id,
                               const std::vector<std::string>& tokens, const schema::LabelSchema& schema) {
  InstanceGraph g;
  g.id = id;
  g.tokens = tokens;
  for (const auto& [span, type] : spans.triggers) g.nodes.push_back({span, NodeKind::trigger, type});
  for (const auto& [span, type] : spans.entities) g.nodes.push_back({span, NodeKind::entity, type});
  g.edges = schema::candidate_edges(g.nodes, schema);
  return g;
}

void transfer_gold(InstanceGraph& graph, const InstanceGraph& gold) {
  std::map<std::pair<NodeKind, schema::Span>, int> gold_node;
  for (std::size_t i = 0; i < gold.nodes.size(); ++i) gold_node.emplace(std::make_pair(gold.nodes[i].kind, gold.nodes[i].span), static_cast<int>(i));
  std::vector<int> match(graph.nodes.size(), -1);
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    auto it = gold_node.find({graph.nodes[i].kind, graph.nodes[i].span});
    match[i] = it == gold_node.end() ? -1 : it->second;
    graph.nodes[i].label = match[i] < 0 ? schema::kUnknownLabel : gold.nodes[static_cast<std::size_t>(match[i])].label;
  }
  std::map<std::pair<int, int>, int> gold_edge;
  for (const auto& e : gold.edges)
    if (e.label > 0) gold_edge[{e.head, e.tail}] = e.label;
  for (auto& e : graph.edges) {
    const int h = match[static_cast<std::size_t>(e.head)], t = match[static_cast<std::size_t>(e.tail)];
    auto it = h < 0 || t < 0 ? gold_edge.end() : gold_edge.find({h, t});
    e.label = it == gold_edge.end() ? 0 : it->second;
  }
}

double identifier_f1(const ident::Identifier& identifier, const std::vector<LabeledSentence>& data,
                     const schema::LabelSchema& schema, const enc::ExternalEmbeddings* external) {
  std::vector<InstanceGraph> pred(data.size()), gold(data.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto spans = identifier.predict(data[i].input, external);
    pred[i] = identified_graph(spans, data[i].graph.id, data[i].graph.tokens, schema);
    pred[i].edges.clear();
    gold[i] = data[i].graph;
    gold[i].edges.clear();
  }
  auto r = eval::score_corpus(pred, gold, schema);
  eval::Counts c = r[eval::Metric::ent];
  c += r[eval::Metric::trig_c];
  return c.f1();
}

TrainResult train_identifier(const ident::Identifier& identifier, ParameterStore& store,
                             const std::vector<LabeledSentence>& train, const std::vector<LabeledSentence>& dev,
                             const TrainConfig& config, const schema::LabelSchema& schema,
                             const enc::ExternalEmbeddings* external, const EpochHook& on_epoch) {
  std::vector<ident::TagTargets> targets;
  for (const auto& s : train) targets.push_back(identifier.targets(gold_spans(s.graph), s.input.ids.size()));
  auto loss = [&](Graph& g, std::size_t i) {
    JointLoss out;
    out.total = identifier.loss(g, train[i].input, targets[i], external);
    out.parts = {out.total, g.scalar(0.0), g.scalar(0.0), g.scalar(0.0)};
    return out;
  };
  DevScore score;
  if (!dev.empty()) score = [&] { return identifier_f1(identifier, dev, schema, external); };
  return fit(store, train.size(), loss, config, score, on_epoch);
}

Throughput measure_throughput(const Labeler& labeler, ParameterStore& store, const std::vector<LabeledSentence>& batch,
                              double min_seconds) {
  if (batch.empty()) throw std::invalid_argument("measure_throughput needs a non-empty batch");
  using Clock = std::chrono::steady_clock;
  // Fastest batch within the window: on a shared machine the minimum is the
  // least disturbed sample.
  auto rate = [&](const std::function<void()>& run) {
    run();  // warm-up
    const auto start = Clock::now();
    double best = std::numeric_limits<double>::infinity();
    do {
      const auto t0 = Clock::now();
      run();
      best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    } while (std::chrono::duration<double>(Clock::now() - start).count() < min_seconds);
    return static_cast<double>(batch.size()) / best;
  };
  AdamW opt(store, AdamWConfig{});
  std::vector<std::size_t> all(batch.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto loss = [&](Graph& g, std::size_t i) { return labeler.loss(g, batch[i]); };
  Throughput t;
  t.train = rate([&] { train_step(store, opt, loss, all, 0); });
  t.test = rate([&] { predict_corpus(labeler, batch, labeler.default_mode()); });
  return t;
}

}  // namespace hoie::train
