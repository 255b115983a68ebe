#pragma once

#include <string>

#include "json.hpp"
#include "hoie/identify/identifier.hpp"
#include "hoie/training/trainer.hpp"

namespace hoie::data {

enum class LabelSpans { gold, identified };

// Every hyperparameter of the run. Defaults are the published settings; the
// encoder block describes the small trainable encoder used in place of a
// pretrained one.
struct Config {
  std::uint64_t seed = 0;
  enc::EncoderConfig encoder;  // vocab_size is filled from the training data
  std::string embeddings;      // external mode: NDJSON vector file
  scoring::ScoringConfig scoring;
  schema::FactorCases cases;
  infer::Schedule schedule;
  infer::AlphaConfig alphas;
  train::AlphaMode alpha_mode = train::AlphaMode::fixed;
  train::TrainConfig training;
  double dropout = 0.4;  // identifier and scorers
  LabelSpans label_spans = LabelSpans::gold;

  ident::IdentifierConfig identifier() const;
  train::LabelerConfig labeler() const;
};

nlohmann::ordered_json config_to_json(const Config& c);
// Missing keys keep their defaults. Throws std::invalid_argument naming the
// offending key on an unknown key, a wrong type or an invalid value.
Config config_from_json(const nlohmann::json& j);
Config load_config(const std::string& path);

}  // namespace hoie::data
