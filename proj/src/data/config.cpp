#include "hoie/data/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

namespace hoie::data {

using nlohmann::json;
using nlohmann::ordered_json;

ident::IdentifierConfig Config::identifier() const {
  ident::IdentifierConfig c;
  c.encoder = encoder;
  c.dropout = dropout;
  return c;
}

train::LabelerConfig Config::labeler() const {
  train::LabelerConfig c;
  c.encoder = encoder;
  c.scoring = scoring;
  c.scoring.dropout = dropout;
  c.cases = cases;
  c.schedule = schedule;
  c.alphas = alphas;
  c.alpha_mode = alpha_mode;
  return c;
}

ordered_json config_to_json(const Config& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["encoder"] = {{"mode", c.encoder.mode == enc::EncoderMode::trainable ? "trainable" : "external"},
                  {"width", c.encoder.width},
                  {"layers", c.encoder.layers},
                  {"window", c.encoder.window},
                  {"embeddings", c.embeddings}};
  j["unary"] = {{"entity", c.scoring.entity_hidden},
                {"trigger", c.scoring.trigger_hidden},
                {"relation", c.scoring.relation_width},
                {"role", c.scoring.role_width}};
  j["binary"] = {{"head", c.scoring.binary_head}, {"tail", c.scoring.binary_tail}, {"mid", c.scoring.binary_mid}};
  j["ternary"] = {{"head", c.scoring.ternary_head}, {"tail", c.scoring.ternary_tail}};
  std::vector<std::string> bc, tc;
  for (auto b : c.cases.binary) bc.push_back(schema::to_string(b));
  for (auto t : c.cases.ternary) tc.push_back(schema::to_string(t));
  j["factors"] = {{"binary", bc}, {"ternary", tc}};
  j["inference"] = {{"iterations", c.schedule.iterations},
                    {"schedule", c.schedule.mode == infer::ScheduleMode::asynchronous ? "asynchronous" : "synchronous"},
                    {"alphas", c.alphas.a},
                    {"alpha_mode", c.alpha_mode == train::AlphaMode::fixed ? "fixed" : "learned"}};
  j["ablation"] = {{"share_labels", c.scoring.share_labels}, {"node_reps", c.scoring.node_reps}};
  const auto& t = c.training;
  j["training"] = {{"batch_size", t.batch_size},
                   {"dropout", c.dropout},
                   {"encoder_lr", t.optimizer.encoder.lr},
                   {"encoder_lr_decay", t.optimizer.encoder.weight_decay},
                   {"lr", t.optimizer.other.lr},
                   {"lr_decay", t.optimizer.other.weight_decay},
                   {"warmup_epochs", t.warmup_epochs},
                   {"epochs", t.epochs},
                   {"grad_clip", t.optimizer.clip},
                   {"label_spans", c.label_spans == LabelSpans::gold ? "gold" : "identified"}};
  return j;
}

namespace {

// Walks one JSON object, dispatching known keys and rejecting the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw std::invalid_argument("config: '" + path_ + "' must be an object");
  }

  template <class T>
  Section& get(const char* key, T& out) {
    known_.emplace(key, [this, key, &out](const json& v) {
      try {
        out = v.get<T>();
      } catch (const json::exception&) {
        throw std::invalid_argument("config: '" + name(key) + "' has the wrong type");
      }
    });
    return *this;
  }
  Section& with(const char* key, std::function<void(const json&, const std::string&)> fn) {
    known_.emplace(key, [this, key, fn](const json& v) { fn(v, name(key)); });
    return *this;
  }
  void run() const {
    for (const auto& [k, v] : j_.items()) {
      auto it = known_.find(k);
      if (it == known_.end()) throw std::invalid_argument("config: unknown key '" + name(k) + "'");
      it->second(v);
    }
  }
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::map<std::string, std::function<void(const json&)>> known_;
};

std::string text(const json& v, const std::string& name) {
  if (!v.is_string()) throw std::invalid_argument("config: '" + name + "' must be a string");
  return v.get<std::string>();
}

void positive(double x, const std::string& name) {
  if (!(x > 0)) throw std::invalid_argument("config: '" + name + "' must be > 0");
}

}  // namespace

Config config_from_json(const json& j) {
  Config c;
  std::size_t batch = c.training.batch_size, epochs = c.training.epochs, warmup = c.training.warmup_epochs;
  Section(j, "")
      .get("seed", c.seed)
      .with("encoder",
            [&](const json& v, const std::string& p) {
              Section(v, p)
                  .with("mode",
                        [&](const json& m, const std::string& n) {
                          const auto s = text(m, n);
                          if (s == "trainable") c.encoder.mode = enc::EncoderMode::trainable;
                          else if (s == "external") c.encoder.mode = enc::EncoderMode::external;
                          else throw std::invalid_argument("config: '" + n + "' must be trainable or external");
                        })
                  .get("width", c.encoder.width)
                  .get("layers", c.encoder.layers)
                  .get("window", c.encoder.window)
                  .get("embeddings", c.embeddings)
                  .run();
            })
      .with("unary",
            [&](const json& v, const std::string& p) {
              Section(v, p)
                  .get("entity", c.scoring.entity_hidden)
                  .get("trigger", c.scoring.trigger_hidden)
                  .get("relation", c.scoring.relation_width)
                  .get("role", c.scoring.role_width)
                  .run();
            })
      .with("binary",
            [&](const json& v, const std::string& p) {
              Section(v, p)
                  .get("head", c.scoring.binary_head)
                  .get("tail", c.scoring.binary_tail)
                  .get("mid", c.scoring.binary_mid)
                  .run();
            })
      .with("ternary",
            [&](const json& v, const std::string& p) {
              Section(v, p).get("head", c.scoring.ternary_head).get("tail", c.scoring.ternary_tail).run();
            })
      .with("factors",
            [&](const json& v, const std::string& p) {
              Section(v, p)
                  .with("binary",
                        [&](const json& a, const std::string& n) {
                          if (!a.is_array()) throw std::invalid_argument("config: '" + n + "' must be an array");
                          c.cases.binary.clear();
                          for (const auto& x : a) c.cases.binary.push_back(schema::parse_binary_case(text(x, n)));
                        })
                  .with("ternary",
                        [&](const json& a, const std::string& n) {
                          if (!a.is_array()) throw std::invalid_argument("config: '" + n + "' must be an array");
                          c.cases.ternary.clear();
                          for (const auto& x : a) c.cases.ternary.push_back(schema::parse_ternary_case(text(x, n)));
                        })
                  .run();
            })
      .with("inference",
            [&](const json& v, const std::string& p) {
              Section(v, p)
                  .get("iterations", c.schedule.iterations)
                  .with("schedule",
                        [&](const json& m, const std::string& n) {
                          const auto s = text(m, n);
                          if (s == "asynchronous") c.schedule.mode = infer::ScheduleMode::asynchronous;
                          else if (s == "synchronous") c.schedule.mode = infer::ScheduleMode::synchronous;
                          else throw std::invalid_argument("config: '" + n + "' must be synchronous or asynchronous");
                        })
                  .get("alphas", c.alphas.a)
                  .with("alpha_mode",
                        [&](const json& m, const std::string& n) {
                          const auto s = text(m, n);
                          if (s == "fixed") c.alpha_mode = train::AlphaMode::fixed;
                          else if (s == "learned") c.alpha_mode = train::AlphaMode::learned;
                          else throw std::invalid_argument("config: '" + n + "' must be fixed or learned");
                        })
                  .run();
            })
      .with("ablation",
            [&](const json& v, const std::string& p) {
              Section(v, p).get("share_labels", c.scoring.share_labels).get("node_reps", c.scoring.node_reps).run();
            })
      .with("training",
            [&](const json& v, const std::string& p) {
              Section(v, p)
                  .get("batch_size", batch)
                  .get("dropout", c.dropout)
                  .get("encoder_lr", c.training.optimizer.encoder.lr)
                  .get("encoder_lr_decay", c.training.optimizer.encoder.weight_decay)
                  .get("lr", c.training.optimizer.other.lr)
                  .get("lr_decay", c.training.optimizer.other.weight_decay)
                  .get("warmup_epochs", warmup)
                  .get("epochs", epochs)
                  .get("grad_clip", c.training.optimizer.clip)
                  .with("label_spans",
                        [&](const json& m, const std::string& n) {
                          const auto s = text(m, n);
                          if (s == "gold") c.label_spans = LabelSpans::gold;
                          else if (s == "identified") c.label_spans = LabelSpans::identified;
                          else throw std::invalid_argument("config: '" + n + "' must be gold or identified");
                        })
                  .run();
            })
      .run();
  c.training.batch_size = batch;
  c.training.epochs = epochs;
  c.training.warmup_epochs = warmup;
  c.training.seed = c.seed;

  positive(c.training.optimizer.encoder.lr, "training.encoder_lr");
  positive(c.training.optimizer.other.lr, "training.lr");
  positive(c.training.optimizer.clip, "training.grad_clip");
  if (c.dropout < 0 || c.dropout >= 1) throw std::invalid_argument("config: 'training.dropout' must lie in [0, 1)");
  try {
    c.training.validate();
    c.alphas.validate();
    c.scoring.validate();
    if (c.schedule.iterations < 0) throw std::invalid_argument("inference.iterations must be >= 0");
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  try {
    return config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": malformed JSON: " + e.what());
  }
}

}  // namespace hoie::data
