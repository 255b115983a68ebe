#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "hoie/data/config.hpp"
#include "hoie/data/corpus.hpp"
#include "hoie/data/synthetic.hpp"
#include "hoie/identify/oracle.hpp"
#include "hoie/inference/oracle.hpp"
#include "hoie/training/checkpoint.hpp"
#include "hoie/training/oracle.hpp"
#include "hoie/training/trainer.hpp"

namespace hoie::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Oracle tolerances shared with the acceptance suite.
constexpr double kMaxMeanL1Gap = 0.02;
constexpr double kMinMapAgreement = 0.85;
constexpr double kMaxLogZGap = 1e-8;
constexpr double kMaxGradError = 1e-4;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write " + path);
  f << text;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
}

schema::LabelSchema schema_for(const std::string& path, const std::vector<data::DatasetRecord>& records) {
  return path.empty() ? data::infer_schema(records) : data::load_schema(path);
}

// Everything needed to rebuild a trained model from its checkpoint.
struct ModelEcho {
  std::string kind;
  data::Config config;
  schema::LabelSchema schema;
  enc::Vocabulary vocab;

  std::string dump() const {
    ordered_json j;
    j["kind"] = kind;
    j["config"] = data::config_to_json(config);
    j["schema"] = data::schema_to_json(schema);
    j["vocabulary"] = vocab.words();
    return j.dump();
  }

  static ModelEcho read(const std::string& path, const std::string& kind) {
    const json j = json::parse(train::read_checkpoint_info(path).config_json);
    ModelEcho m;
    m.kind = j.at("kind").get<std::string>();
    if (m.kind != kind) throw ValidationError(path + " holds a " + m.kind + " model, expected " + kind);
    m.config = data::config_from_json(j.at("config"));
    m.schema = data::schema_from_json(j.at("schema"));
    m.vocab = enc::Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
    m.config.encoder.vocab_size = m.vocab.size();
    return m;
  }
};

std::unique_ptr<enc::ExternalEmbeddings> embeddings_for(const data::Config& c) {
  if (c.encoder.mode != enc::EncoderMode::external) return nullptr;
  if (c.embeddings.empty()) throw ValidationError("external encoder mode needs encoder.embeddings");
  return std::make_unique<enc::ExternalEmbeddings>(enc::ExternalEmbeddings::load(c.embeddings));
}

struct LoadedIdentifier {
  ModelEcho echo;
  num::ParameterStore store;
  std::unique_ptr<ident::Identifier> model;
  std::unique_ptr<enc::ExternalEmbeddings> external;

  explicit LoadedIdentifier(const std::string& path)
      : echo(ModelEcho::read(path, "identifier")), store(echo.config.seed) {
    external = embeddings_for(echo.config);
    model = std::make_unique<ident::Identifier>(echo.config.identifier(), echo.schema, store);
    train::load_checkpoint(path, store);
  }

  // Identified spans as an unlabelled graph over the record's tokens.
  schema::InstanceGraph graph(const data::DatasetRecord& r) const {
    enc::SentenceInput in{r.id, echo.vocab.encode(r.tokens)};
    return train::identified_graph(model->predict(in, external.get()), r.id, r.tokens, echo.schema);
  }
};

struct LoadedLabeler {
  ModelEcho echo;
  num::ParameterStore store;
  std::unique_ptr<train::Labeler> model;
  std::unique_ptr<enc::ExternalEmbeddings> external;

  explicit LoadedLabeler(const std::string& path) : echo(ModelEcho::read(path, "labeler")), store(echo.config.seed) {
    external = embeddings_for(echo.config);
    model = std::make_unique<train::Labeler>(echo.config.labeler(), echo.schema, store);
    train::load_checkpoint(path, store);
  }
};

ordered_json epoch_json(const train::EpochLog& l) {
  ordered_json j;
  j["epoch"] = l.epoch;
  j["loss"] = {{"trigger", l.loss.components[0]},
               {"entity", l.loss.components[1]},
               {"role", l.loss.components[2]},
               {"relation", l.loss.components[3]},
               {"total", l.loss.total}};
  j["grad_norm"] = l.loss.grad_norm;
  j["dev"] = l.dev_score;
  j["best"] = l.best;
  return j;
}

struct TrainArgs {
  std::string train, dev, schema, config, out, identifier;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
};

void add_train_options(CLI::App* sub, TrainArgs& a) {
  sub->add_option("--train", a.train, "training NDJSON")->required();
  sub->add_option("--dev", a.dev, "development NDJSON (model selection)");
  sub->add_option("--schema", a.schema, "label schema JSON (default: inferred from --train)");
  sub->add_option("--config", a.config, "run config JSON (default: built-in defaults)");
  sub->add_option("--out", a.out, "checkpoint path prefix")->required();
  sub->add_option("--seed", a.seed, "overrides the config seed");
  sub->add_option("--epochs", a.epochs, "overrides training.epochs");
}

struct TrainSetup {
  data::Config config;
  std::vector<data::DatasetRecord> train, dev;
  schema::LabelSchema schema;
  enc::Vocabulary vocab;
  std::unique_ptr<enc::ExternalEmbeddings> external;
};

TrainSetup setup_training(const TrainArgs& a) {
  TrainSetup s;
  s.config = a.config.empty() ? data::config_from_json(json::object()) : data::load_config(a.config);
  if (a.seed) s.config.seed = s.config.training.seed = *a.seed;
  if (a.epochs) s.config.training.epochs = *a.epochs;
  s.train = data::load_dataset(a.train);
  if (s.train.empty()) throw ValidationError(a.train + ": no records");
  if (!a.dev.empty()) s.dev = data::load_dataset(a.dev);
  s.schema = schema_for(a.schema, s.train);
  s.vocab = data::build_vocabulary(s.train);
  s.config.encoder.vocab_size = s.vocab.size();
  s.external = embeddings_for(s.config);
  if (s.external) s.config.encoder.width = s.external->width();
  return s;
}

// Echo line first, then one line per epoch.
struct EpochLogFile {
  std::ofstream f;
  std::ostream& out;
  EpochLogFile(const std::string& path, const std::string& echo, std::ostream& o) : f(path), out(o) {
    if (!f) throw ValidationError("cannot write " + path);
    f << json{{"echo", json::parse(echo)}}.dump() << "\n";
  }
  void operator()(const train::EpochLog& l) {
    const auto j = epoch_json(l);
    f << j.dump() << "\n";
    f.flush();
    out << "epoch " << l.epoch << " loss " << l.loss.total << " dev " << l.dev_score << (l.best ? " *" : "") << "\n";
  }
};

int cmd_synth(const std::string& out, std::size_t n, std::uint64_t seed, const std::string& schema_config,
              std::optional<double> noise, const std::string& labels_out, std::ostream& os) {
  auto s = schema_config.empty() ? data::default_synthetic_schema() : data::synthetic_schema_from_json(read_json(schema_config));
  if (noise) s.noise = *noise;
  const auto records = data::generate_synthetic(s, seed, n);
  data::save_dataset(out, records);
  if (!labels_out.empty()) data::save_schema(labels_out, s.label_schema());
  os << "wrote " << records.size() << " records to " << out << "\n";
  return 0;
}

int cmd_train_identify(const TrainArgs& a, std::ostream& os) {
  auto s = setup_training(a);
  num::ParameterStore store(s.config.seed);
  ident::Identifier model(s.config.identifier(), s.schema, store);
  const auto train = data::to_sentences(s.train, s.schema, s.vocab);
  const auto dev = data::to_sentences(s.dev, s.schema, s.vocab);
  const ModelEcho echo{"identifier", s.config, s.schema, s.vocab};
  EpochLogFile log(a.out + ".log.ndjson", echo.dump(), os);
  const auto r = train::train_identifier(model, store, train, dev, s.config.training, s.schema, s.external.get(),
                                         [&](const train::EpochLog& l) { log(l); });
  train::save_checkpoint(a.out, store, echo.dump(), s.config.seed);
  os << "best epoch " << r.best_epoch << " dev " << r.best_dev << "; wrote " << a.out << ".json/.bin\n";
  return 0;
}

int cmd_train_label(const TrainArgs& a, std::ostream& os) {
  auto s = setup_training(a);
  num::ParameterStore store(s.config.seed);
  train::Labeler model(s.config.labeler(), s.schema, store);
  auto train = data::to_sentences(s.train, s.schema, s.vocab);
  const auto dev = data::to_sentences(s.dev, s.schema, s.vocab);
  if (s.config.label_spans == data::LabelSpans::identified) {
    if (a.identifier.empty()) throw ValidationError("training.label_spans = identified needs --identifier");
    LoadedIdentifier id(a.identifier);
    for (std::size_t i = 0; i < train.size(); ++i) {
      auto g = id.graph(s.train[i]);
      train::transfer_gold(g, train[i].graph);
      train[i].graph = std::move(g);
    }
  }
  const ModelEcho echo{"labeler", s.config, s.schema, s.vocab};
  EpochLogFile log(a.out + ".log.ndjson", echo.dump(), os);
  const auto r = train::train_labeler(model, store, train, dev, s.config.training, s.external.get(),
                                      [&](const train::EpochLog& l) { log(l); });
  train::save_checkpoint(a.out, store, echo.dump(), s.config.seed);
  os << "best epoch " << r.best_epoch << " dev " << r.best_dev << "; wrote " << a.out << ".json/.bin\n";
  return 0;
}

std::vector<schema::InstanceGraph> graphs_of(const std::vector<data::DatasetRecord>& records,
                                             const schema::LabelSchema& schema) {
  std::vector<schema::InstanceGraph> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(data::to_graph(r, schema));
  return out;
}

int cmd_eval(const std::string& pred, const std::string& gold, const std::string& schema_path,
             const std::string& out, const std::string& pred_b, const std::string& task, const std::string& matrix,
             std::ostream& os) {
  const auto p = data::load_dataset(pred);
  const auto g = data::load_dataset(gold);
  std::vector<data::DatasetRecord> all = g;
  all.insert(all.end(), p.begin(), p.end());
  std::vector<data::DatasetRecord> b;
  if (!pred_b.empty()) {
    b = data::load_dataset(pred_b);
    all.insert(all.end(), b.begin(), b.end());
  }
  const auto schema = schema_for(schema_path, all);
  const auto gold_graphs = graphs_of(g, schema);
  const auto report = eval::score_corpus(graphs_of(p, schema), gold_graphs, schema);
  const std::string text = report.to_json(2);
  if (out.empty()) os << text << "\n";
  else write_file(out, text + "\n");
  if (!pred_b.empty()) {
    if (matrix.empty()) throw ValidationError("--pred-b needs --matrix");
    write_file(matrix, eval::error_matrix(graphs_of(p, schema), graphs_of(b, schema), gold_graphs, schema,
                                          eval::parse_error_task(task)));
  }
  return 0;
}

int cmd_infer(const std::string& model_path, const std::string& identifier, const std::string& input,
              const std::string& out, std::ostream& os) {
  LoadedLabeler lab(model_path);
  std::unique_ptr<LoadedIdentifier> id;
  if (!identifier.empty()) id = std::make_unique<LoadedIdentifier>(identifier);
  const auto records = data::load_dataset(input);
  std::vector<train::LabeledSentence> sents;
  for (const auto& r : records) {
    train::LabeledSentence s;
    s.input = {r.id, lab.echo.vocab.encode(r.tokens)};
    if (id) {
      s.graph = id->graph(r);
    } else {
      // gold spans, labels dropped
      s.graph = data::to_graph(r, lab.echo.schema);
      for (auto& n : s.graph.nodes) n.label = schema::kUnknownLabel;
      for (auto& e : s.graph.edges) e.label = 0;
    }
    sents.push_back(std::move(s));
  }
  const auto preds = train::predict_corpus(*lab.model, sents, lab.model->default_mode(), lab.external.get());
  std::vector<data::DatasetRecord> outr;
  for (const auto& g : preds) outr.push_back(data::to_record(g, lab.echo.schema));
  data::save_dataset(out, outr);
  ordered_json echo;
  echo["model"] = json::parse(lab.echo.dump());
  echo["identifier"] = identifier;
  echo["input"] = input;
  write_file(out + ".echo.json", echo.dump(2) + "\n");
  os << "wrote " << outr.size() << " predictions to " << out << "\n";
  return 0;
}

int cmd_oracle_check(std::uint64_t seed, std::size_t graphs, std::size_t chains, std::ostream& os) {
  os << std::setprecision(4);
  bool ok = true;

  const auto chain = ident::chain_crf_oracle(seed, chains);
  const bool chain_ok = chain.viterbi_matches == chain.instances && chain.max_log_z_gap <= kMaxLogZGap;
  os << "chain-crf: viterbi matches " << chain.viterbi_matches << "/" << chain.instances << ", max |log Z gap| "
     << chain.max_log_z_gap << (chain_ok ? "" : "  OUT OF TOLERANCE") << "\n";
  ok = ok && chain_ok;

  const infer::Schedule sched{3, infer::ScheduleMode::asynchronous};
  const auto weak = infer::mfvi_oracle(seed, graphs, 0.1, sched);
  const auto strong = infer::mfvi_oracle(seed, graphs, 0.5, sched);
  const bool weak_ok = weak.mean_l1_gap <= kMaxMeanL1Gap;
  const bool strong_ok = strong.map_agreement() >= kMinMapAgreement;
  os << "mfvi sigma=0.1 T=3: mean L1 marginal gap " << weak.mean_l1_gap << ", max " << weak.max_l1_gap << " over "
     << weak.variables << " variables" << (weak_ok ? "" : "  OUT OF TOLERANCE") << "\n";
  os << "mfvi sigma=0.5 T=3: MAP agreement " << strong.map_agreement() << " (" << strong.map_matches << "/"
     << strong.variables << ")" << (strong_ok ? "" : "  OUT OF TOLERANCE") << "\n";
  ok = ok && weak_ok && strong_ok;

  double worst = 0.0;
  for (int t : {1, 2})
    for (auto mode : {train::AlphaMode::fixed, train::AlphaMode::learned}) {
      const auto r = train::labeler_gradient_check(t, mode, seed);
      os << "gradients T=" << t << (mode == train::AlphaMode::fixed ? " fixed" : " learned") << " alpha: max rel error "
         << r.max_rel_error << " over " << r.checked << " scalars (worst " << r.worst << ")\n";
      worst = std::max(worst, r.max_rel_error);
    }
  ok = ok && worst <= kMaxGradError;
  os << "max marginal gap: " << weak.max_l1_gap << "\n";
  os << "max gradient relative error: " << worst << "\n";
  os << (ok ? "oracle-check: within tolerances" : "oracle-check: OUT OF TOLERANCE") << "\n";
  return ok ? 0 : 1;
}

// The factor configurations of the speed comparison.
std::vector<std::pair<std::string, schema::FactorCases>> bench_configurations() {
  using schema::BinaryCase;
  using schema::TernaryCase;
  return {{"baseline", {}},
          {"+sib", {{BinaryCase::homo_i}, {}}},
          {"+ter", {{}, {TernaryCase::hete_ii, TernaryCase::hete_iii}}},
          {"+sib+ter", {{BinaryCase::homo_i}, {TernaryCase::hete_ii, TernaryCase::hete_iii}}}};
}

int cmd_bench(const std::string& config_path, std::size_t sentences, std::uint64_t seed, double min_seconds,
              const std::string& json_out, std::ostream& os) {
  auto config = config_path.empty() ? data::config_from_json(json::object()) : data::load_config(config_path);
  auto syn = data::default_synthetic_schema();
  syn.max_tails = 2;
  syn.distractor_rate = 0.0;  // at most 6 nodes per sentence
  const auto records = data::generate_synthetic(syn, seed, sentences);
  const auto schema = syn.label_schema();
  const auto vocab = data::build_vocabulary(records);
  const auto batch = data::to_sentences(records, schema, vocab);
  config.encoder.vocab_size = vocab.size();
  if (config.encoder.mode == enc::EncoderMode::external)
    throw ValidationError("bench uses the trainable encoder (synthetic sentences have no external vectors)");

  ordered_json report = ordered_json::array();
  os << std::fixed << std::setprecision(1);
  os << std::left << std::setw(10) << "config" << std::right << std::setw(12) << "train/s" << std::setw(12)
     << "test/s" << "\n";
  for (const auto& [name, cases] : bench_configurations()) {
    auto c = config;
    c.cases = cases;
    num::ParameterStore store(seed);
    train::Labeler model(c.labeler(), schema, store);
    const auto t = train::measure_throughput(model, store, batch, min_seconds);
    os << std::left << std::setw(10) << name << std::right << std::setw(12) << t.train << std::setw(12) << t.test
       << "\n";
    report.push_back({{"config", name}, {"train", t.train}, {"test", t.test}});
  }
  if (!json_out.empty()) {
    ordered_json j;
    j["echo"] = {{"config", data::config_to_json(config)}, {"sentences", sentences}, {"seed", seed}};
    j["results"] = report;
    write_file(json_out, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"High-order CRF joint information extraction"};
  app.name("hoie");
  app.require_subcommand(1);

  std::string out_path, schema_config, labels_out;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::optional<double> noise;
  auto* synth = app.add_subcommand("synth", "generate a planted-correlation synthetic dataset");
  synth->add_option("--out", out_path, "output NDJSON")->required();
  synth->add_option("--n", n, "number of sentences");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--schema-config", schema_config, "synthetic schema JSON (default: built-in)");
  synth->add_option("--noise", noise, "overrides the noise rate");
  synth->add_option("--schema-out", labels_out, "where to write the label schema JSON");

  TrainArgs ti, tl;
  auto* train_identify = app.add_subcommand("train-identify", "train the span identifier");
  add_train_options(train_identify, ti);
  auto* train_label = app.add_subcommand("train-label", "train the node/edge labeler");
  add_train_options(train_label, tl);
  train_label->add_option("--identifier", tl.identifier, "identifier checkpoint (label_spans = identified)");

  std::string pred, gold, schema_path, pred_b, task = "relation", matrix;
  auto* ev = app.add_subcommand("eval", "score predictions against gold");
  ev->add_option("--pred", pred, "predicted NDJSON")->required();
  ev->add_option("--gold", gold, "gold NDJSON")->required();
  ev->add_option("--schema", schema_path, "label schema JSON (default: inferred from the files)");
  ev->add_option("--out", out_path, "MetricReport JSON path (default: stdout)");
  ev->add_option("--pred-b", pred_b, "second system for the error matrix");
  ev->add_option("--task", task, "error matrix task: entity, trigger, relation or role");
  ev->add_option("--matrix", matrix, "error matrix CSV path");

  std::string model, identifier, input;
  auto* inf = app.add_subcommand("infer", "label sentences with a trained model");
  inf->add_option("--model", model, "labeler checkpoint")->required();
  inf->add_option("--identifier", identifier, "identifier checkpoint (default: use the input's spans)");
  inf->add_option("--input", input, "input NDJSON")->required();
  inf->add_option("--out", out_path, "predicted NDJSON")->required();

  std::uint64_t oracle_seed = 7;
  std::size_t graphs = 100, chains = 200;
  auto* oracle = app.add_subcommand("oracle-check", "MFVI vs enumeration and gradient vs finite differences");
  oracle->add_option("--seed", oracle_seed, "seed");
  oracle->add_option("--graphs", graphs, "random factor graphs per check");
  oracle->add_option("--chains", chains, "random chains for the CRF check");

  std::string config_path, json_out;
  std::size_t sentences = 32;
  double min_seconds = 0.5;
  auto* bench = app.add_subcommand("bench", "train/test sentences per second per factor configuration");
  bench->add_option("--config", config_path, "run config JSON (dimensions, T)");
  bench->add_option("--sentences", sentences, "batch size");
  bench->add_option("--seed", seed, "seed");
  bench->add_option("--min-seconds", min_seconds, "timing window per measurement");
  bench->add_option("--json", json_out, "also write the results as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*synth) return cmd_synth(out_path, n, seed, schema_config, noise, labels_out, out);
    if (*train_identify) return cmd_train_identify(ti, out);
    if (*train_label) return cmd_train_label(tl, out);
    if (*ev) return cmd_eval(pred, gold, schema_path, out_path, pred_b, task, matrix, out);
    if (*inf) return cmd_infer(model, identifier, input, out_path, out);
    if (*oracle) return cmd_oracle_check(oracle_seed, graphs, chains, out);
    if (*bench) return cmd_bench(config_path, sentences, seed, min_seconds, json_out, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace hoie::cli
