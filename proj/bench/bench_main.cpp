#include <benchmark/benchmark.h>
#include <omp.h>

#include "hoie/data/config.hpp"
#include "hoie/data/corpus.hpp"
#include "hoie/data/synthetic.hpp"
#include "hoie/inference/oracle.hpp"
#include "hoie/inference/reference.hpp"
#include "hoie/training/trainer.hpp"

using namespace hoie;

namespace {

infer::PotentialSet medium_potentials() {
  Rng rng(5);
  infer::RandomGraphSpec spec;
  spec.triggers = 2;
  spec.entities = 4;
  spec.trigger_labels = 5;
  spec.entity_labels = 6;
  spec.role_labels = 4;
  spec.relation_labels = 6;
  spec.scale = 0.5;
  return infer::random_potentials(spec, rng);
}

// Plain-loop MFVI kept for testing.
void BM_MfviReference(benchmark::State& state) {
  const auto pot = medium_potentials();
  for (auto _ : state) benchmark::DoNotOptimize(infer::reference::run_mfvi(pot, {2, infer::ScheduleMode::asynchronous}, {}));
}
BENCHMARK(BM_MfviReference);

// Tape MFVI on the same potentials, including graph construction.
void BM_MfviTape(benchmark::State& state) {
  const auto pot = medium_potentials();
  for (auto _ : state) {
    num::Graph g(num::RunMode::eval);
    auto q = infer::run_mfvi(scoring::bind(g, pot), {2, infer::ScheduleMode::asynchronous}, infer::constant_alphas(g, {}));
    benchmark::DoNotOptimize(infer::values(q));
  }
}
BENCHMARK(BM_MfviTape);

struct Batch {
  schema::LabelSchema schema;
  std::vector<train::LabeledSentence> sentences;
  enc::Vocabulary vocab;
};

const Batch& batch() {
  static const Batch b = [] {
    auto syn = data::default_synthetic_schema();
    syn.max_tails = 2;
    syn.distractor_rate = 0.0;
    auto recs = data::generate_synthetic(syn, 0, 32);
    Batch out{syn.label_schema(), {}, data::build_vocabulary(recs)};
    out.sentences = data::to_sentences(recs, out.schema, out.vocab);
    return out;
  }();
  return b;
}

train::LabelerConfig labeler_config(bool high_order) {
  auto c = data::config_from_json(nlohmann::json::object());
  c.encoder.vocab_size = batch().vocab.size();
  if (!high_order) c.cases = {};
  else c.cases = {{schema::BinaryCase::homo_i}, {schema::TernaryCase::hete_ii, schema::TernaryCase::hete_iii}};
  return c.labeler();
}

int thread_count(std::int64_t arg) { return arg == 0 ? omp_get_num_procs() : static_cast<int>(arg); }

// Corpus prediction over 32 sentences; threads = 1 (serial) or 0 (all cores), high_order = homo-i + hete-ii + hete-iii.
void BM_PredictCorpus(benchmark::State& state) {
  const int threads = thread_count(state.range(0));
  num::ParameterStore store(0);
  train::Labeler model(labeler_config(state.range(1) != 0), batch().schema, store);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads);
  for (auto _ : state) benchmark::DoNotOptimize(train::predict_corpus(model, batch().sentences, model.default_mode()));
  omp_set_num_threads(saved);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch().sentences.size()));
}
BENCHMARK(BM_PredictCorpus)->ArgsProduct({{1, 0}, {0, 1}})->ArgNames({"threads", "high_order"})->Unit(benchmark::kMillisecond);

// One whole-batch train step; same args.
void BM_TrainStep(benchmark::State& state) {
  const int threads = thread_count(state.range(0));
  num::ParameterStore store(0);
  train::Labeler model(labeler_config(state.range(1) != 0), batch().schema, store);
  num::AdamW opt(store, num::AdamWConfig{});
  std::vector<std::size_t> all(batch().sentences.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto loss = [&](num::Graph& g, std::size_t i) { return model.loss(g, batch().sentences[i]); };
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads);
  for (auto _ : state) benchmark::DoNotOptimize(train::train_step(store, opt, loss, all, 0));
  omp_set_num_threads(saved);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(all.size()));
}
BENCHMARK(BM_TrainStep)->ArgsProduct({{1, 0}, {0, 1}})->ArgNames({"threads", "high_order"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
