#include "hoie/identify/identifier.hpp"

namespace hoie::ident {

using namespace hoie::num;
using schema::NodeKind;

Identifier::Identifier(const IdentifierConfig& config, const schema::LabelSchema& schema, ParameterStore& store)
    : config_(config), encoder_(config.encoder, store, "ident.encoder") {
  auto make = [&](Tagger& t, const schema::LabelSet& types, const std::string& prefix) {
    t.tags = BioTagSet(types);
    const std::size_t k = t.tags.size();
    t.w = &store.create(prefix + ".emit.w", {config_.encoder.width, k}, ParamGroup::other, Init::glorot);
    t.b = &store.create(prefix + ".emit.b", {k}, ParamGroup::other, Init::zeros);
    t.a = &store.create(prefix + ".transitions", {k, k}, ParamGroup::other, Init::zeros);
    t.mask = t.tags.allowed_mask();
    t.pins = t.tags.banned_pins();
  };
  make(trig_, schema.event, "ident.trigger");
  make(ent_, schema.entity, "ident.entity");
}

Var Identifier::transitions(Graph& g, NodeKind kind) const {
  const Tagger& t = tagger(kind);
  return add(mul(g.parameter(*t.a), g.constant(t.mask)), g.constant(t.pins));
}

Var Identifier::emissions(Graph& g, Var tokens, NodeKind kind) const {
  const Tagger& t = tagger(kind);
  Var x = dropout(tokens, config_.dropout, std::string("ident.") + schema::to_string(kind) + ".in");
  return affine(x, g.parameter(*t.w), g.parameter(*t.b));
}

Var Identifier::loss(Graph& g, const enc::SentenceInput& sentence, const TagTargets& gold,
                     const enc::ExternalEmbeddings* external) const {
  Var tokens = encoder_.encode(g, sentence, external);
  Var lt = crf_nll(emissions(g, tokens, NodeKind::trigger), transitions(g, NodeKind::trigger), gold.triggers, trig_.tags);
  Var le = crf_nll(emissions(g, tokens, NodeKind::entity), transitions(g, NodeKind::entity), gold.entities, ent_.tags);
  return add(lt, le);
}

IdentifiedSpans Identifier::predict(const enc::SentenceInput& sentence, const enc::ExternalEmbeddings* external) const {
  IdentifiedSpans out;
  if (sentence.ids.empty()) return out;
  Graph g(RunMode::eval);
  Var tokens = encoder_.encode(g, sentence, external);
  for (NodeKind kind : {NodeKind::trigger, NodeKind::entity}) {
    auto tags = viterbi_decode(emissions(g, tokens, kind).value(), transitions(g, kind).value());
    (kind == NodeKind::trigger ? out.triggers : out.entities) = decode_spans(tags);
  }
  return out;
}

TagTargets Identifier::targets(const IdentifiedSpans& gold, std::size_t n) const {
  return {trig_.tags.encode(gold.triggers, n), ent_.tags.encode(gold.entities, n)};
}

}  // namespace hoie::ident
