#pragma once

#include "hoie/encoder/encoder.hpp"
#include "hoie/identify/crf.hpp"

namespace hoie::ident {

struct IdentifierConfig {
  enc::EncoderConfig encoder;
  double dropout = 0.4;
};

struct IdentifiedSpans {
  std::vector<std::pair<schema::Span, int>> triggers;  // type ids into the event label set
  std::vector<std::pair<schema::Span, int>> entities;  // type ids into the entity label set
};

// Gold BIO tag sequences for one sentence.
struct TagTargets {
  std::vector<int> triggers;
  std::vector<int> entities;
};

// Trigger and entity taggers over one shared encoder. Each tagger has a
// linear emission layer and a transition matrix whose BIO-invalid entries
// are pinned to BioTagSet::kBanned.
class Identifier {
 public:
  Identifier(const IdentifierConfig& config, const schema::LabelSchema& schema, num::ParameterStore& store);

  const IdentifierConfig& config() const noexcept { return config_; }
  const enc::TokenEncoder& encoder() const noexcept { return encoder_; }
  const BioTagSet& tags(schema::NodeKind kind) const { return kind == schema::NodeKind::trigger ? trig_.tags : ent_.tags; }

  num::Var transitions(num::Graph& g, schema::NodeKind kind) const;
  num::Var emissions(num::Graph& g, num::Var tokens, schema::NodeKind kind) const;

  num::Var loss(num::Graph& g, const enc::SentenceInput& sentence, const TagTargets& gold,
                const enc::ExternalEmbeddings* external = nullptr) const;
  IdentifiedSpans predict(const enc::SentenceInput& sentence, const enc::ExternalEmbeddings* external = nullptr) const;
  TagTargets targets(const IdentifiedSpans& gold, std::size_t n) const;

 private:
  struct Tagger {
    BioTagSet tags;
    num::Parameter* w = nullptr;
    num::Parameter* b = nullptr;
    num::Parameter* a = nullptr;
    num::Tensor mask, pins;
  };
  const Tagger& tagger(schema::NodeKind kind) const { return kind == schema::NodeKind::trigger ? trig_ : ent_; }

  IdentifierConfig config_;
  enc::TokenEncoder encoder_;
  Tagger trig_, ent_;
};

}  // namespace hoie::ident
