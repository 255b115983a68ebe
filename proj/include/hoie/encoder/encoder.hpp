#pragma once

#include <map>
#include <string>
#include <vector>

#include "hoie/numerics/composite.hpp"
#include "hoie/schema/instance.hpp"

namespace hoie::enc {

enum class EncoderMode { trainable, external };

struct EncoderConfig {
  EncoderMode mode = EncoderMode::trainable;
  std::size_t vocab_size = 0;
  std::size_t width = 64;
  std::size_t layers = 1;
  std::size_t window = 1;  // context radius

  // Throws std::invalid_argument.
  void validate() const;
};

// Per-sentence token vectors read from an NDJSON file of {"id", "vectors"}.
class ExternalEmbeddings {
 public:
  ExternalEmbeddings() = default;
  // Throws std::runtime_error with the line number on malformed input.
  static ExternalEmbeddings load(const std::string& path);
  void add(const std::string& id, num::Tensor vectors);

  bool contains(const std::string& id) const { return table_.count(id) != 0; }
  // Throws std::out_of_range for a missing id.
  const num::Tensor& at(const std::string& id) const;
  std::size_t width() const noexcept { return width_; }

 private:
  std::map<std::string, num::Tensor> table_;
  std::size_t width_ = 0;
};

// What the encoder needs to know about one sentence.
struct SentenceInput {
  std::string id;
  std::vector<int> ids;  // one per token
};

// Embedding lookup followed by `layers` rounds of
//   x <- tanh((x + window_mean(x)) W + b)
class TokenEncoder {
 public:
  TokenEncoder() = default;
  TokenEncoder(const EncoderConfig& config, num::ParameterStore& store, const std::string& prefix);

  const EncoderConfig& config() const noexcept { return config_; }
  std::size_t width() const noexcept { return config_.width; }

  // [n, width]. Throws std::out_of_range on an id outside the vocabulary.
  num::Var encode(num::Graph& g, const std::vector<int>& ids) const;
  // External mode: the stored vectors as a constant. Throws on a missing
  // sentence, a token-count mismatch or a width mismatch.
  num::Var encode(num::Graph& g, const ExternalEmbeddings& vectors, const std::string& sentence_id,
                  std::size_t tokens) const;
  // Dispatches on the configured mode; `external` is required in external mode.
  num::Var encode(num::Graph& g, const SentenceInput& sentence, const ExternalEmbeddings* external) const;

 private:
  EncoderConfig config_;
  num::Parameter* embed_ = nullptr;
  std::vector<num::Parameter*> w_;
  std::vector<num::Parameter*> b_;
};

// Row-normalized averaging matrix [spans, n] for a set of spans.
num::Tensor span_average_matrix(const std::vector<schema::Span>& spans, std::size_t n);

// Mean of the token rows inside each span: [spans, width]. Throws
// std::out_of_range for a span outside the sentence.
num::Var span_representations(num::Var tokens, const std::vector<schema::Span>& spans);
num::Var span_representation(num::Var tokens, schema::Span span);

}  // namespace hoie::enc
