#include "hoie/encoder/encoder.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace hoie::enc {

using namespace hoie::num;

void EncoderConfig::validate() const {
  if (width == 0) throw std::invalid_argument("encoder width must be > 0");
  if (mode == EncoderMode::trainable && vocab_size == 0) {
    throw std::invalid_argument("trainable encoder needs a vocabulary");
  }
}

ExternalEmbeddings ExternalEmbeddings::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file " + path);
  ExternalEmbeddings out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return std::runtime_error(path + ":" + std::to_string(lineno) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("vectors") ||
        !j["vectors"].is_array()) {
      throw fail("expected {\"id\": string, \"vectors\": [[...], ...]}");
    }
    const auto& rows = j["vectors"];
    std::size_t width = rows.empty() ? out.width_ : rows[0].size();
    std::vector<double> data;
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != width) throw fail("ragged vector rows");
      for (const auto& v : row) {
        if (!v.is_number()) throw fail("non-numeric vector entry");
        data.push_back(v.get<double>());
      }
    }
    try {
      out.add(j["id"].get<std::string>(), Tensor({rows.size(), width}, std::move(data)));
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  return out;
}

void ExternalEmbeddings::add(const std::string& id, Tensor vectors) {
  if (vectors.rank() != 2) throw std::invalid_argument("embedding vectors must be [tokens, width]");
  if (!vectors.all_finite()) throw std::invalid_argument("non-finite embedding value for '" + id + "'");
  if (vectors.dim(0) > 0) {
    if (width_ == 0) width_ = vectors.dim(1);
    if (vectors.dim(1) != width_) throw std::invalid_argument("embedding width mismatch for '" + id + "'");
  }
  if (!table_.emplace(id, std::move(vectors)).second) throw std::invalid_argument("duplicate embedding id '" + id + "'");
}

const Tensor& ExternalEmbeddings::at(const std::string& id) const {
  auto it = table_.find(id);
  if (it == table_.end()) throw std::out_of_range("no external vectors for sentence '" + id + "'");
  return it->second;
}

TokenEncoder::TokenEncoder(const EncoderConfig& config, ParameterStore& store, const std::string& prefix)
    : config_(config) {
  config_.validate();
  if (config_.mode != EncoderMode::trainable) return;
  const std::size_t d = config_.width;
  embed_ = &store.create(prefix + ".embed", {config_.vocab_size, d}, ParamGroup::encoder, Init::normal, 1.0);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string p = prefix + ".mix" + std::to_string(l);
    w_.push_back(&store.create(p + ".w", {d, d}, ParamGroup::encoder, Init::glorot));
    b_.push_back(&store.create(p + ".b", {d}, ParamGroup::encoder, Init::zeros));
  }
}

Var TokenEncoder::encode(Graph& g, const std::vector<int>& ids) const {
  if (config_.mode != EncoderMode::trainable || !embed_) throw std::logic_error("encoder is not in trainable mode");
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of " +
                              std::to_string(config_.vocab_size));
    }
    rows.push_back(static_cast<std::size_t>(id));
  }
  Var x = take(g.parameter(*embed_), std::move(rows));
  const std::size_t n = ids.size();
  if (n == 0 || config_.layers == 0) return x;

  // window_mean as a fixed [n, n] row-stochastic matrix
  Tensor window({n, n});
  const std::size_t r = config_.window;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= r ? t - r : 0;
    const std::size_t hi = std::min(n - 1, t + r);
    for (std::size_t s = lo; s <= hi; ++s) window.at(t, s) = 1.0 / static_cast<double>(hi - lo + 1);
  }
  Var mix = g.constant(std::move(window));
  for (std::size_t l = 0; l < w_.size(); ++l) {
    Var h = add(x, matmul(mix, x));
    x = tanh(affine(h, g.parameter(*w_[l]), g.parameter(*b_[l])));
  }
  return x;
}

Var TokenEncoder::encode(Graph& g, const ExternalEmbeddings& vectors, const std::string& sentence_id,
                         std::size_t tokens) const {
  const Tensor& v = vectors.at(sentence_id);
  if (v.dim(0) != tokens) {
    throw std::invalid_argument("external vectors for '" + sentence_id + "' have " + std::to_string(v.dim(0)) +
                                " rows for " + std::to_string(tokens) + " tokens");
  }
  if (tokens > 0 && v.dim(1) != config_.width) {
    throw std::invalid_argument("external vector width " + std::to_string(v.dim(1)) + " != encoder width " +
                                std::to_string(config_.width));
  }
  return g.constant(v);
}

Var TokenEncoder::encode(Graph& g, const SentenceInput& sentence, const ExternalEmbeddings* external) const {
  if (config_.mode == EncoderMode::trainable) return encode(g, sentence.ids);
  if (!external) throw std::invalid_argument("external encoder mode needs an embedding file");
  return encode(g, *external, sentence.id, sentence.ids.size());
}

Tensor span_average_matrix(const std::vector<schema::Span>& spans, std::size_t n) {
  Tensor m({spans.size(), n});
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto& s = spans[k];
    if (!s.valid_for(static_cast<int>(n))) {
      throw std::out_of_range("span (" + std::to_string(s.start) + "," + std::to_string(s.end) +
                              ") outside sentence of length " + std::to_string(n));
    }
    for (int t = s.start; t <= s.end; ++t) m.at(k, static_cast<std::size_t>(t)) = 1.0 / s.length();
  }
  return m;
}

Var span_representations(Var tokens, const std::vector<schema::Span>& spans) {
  if (tokens.value().rank() != 2) throw ShapeError("token representations must be [n, width]");
  Tensor m = span_average_matrix(spans, tokens.shape()[0]);
  return matmul(tokens.graph->constant(std::move(m)), tokens);
}

Var span_representation(Var tokens, schema::Span span) {
  Var rows = span_representations(tokens, {span});
  return reshape(rows, {rows.shape()[1]});
}

}  // namespace hoie::enc
