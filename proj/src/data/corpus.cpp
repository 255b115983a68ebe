#include "hoie/data/corpus.hpp"

namespace hoie::data {

enc::Vocabulary build_vocabulary(const std::vector<DatasetRecord>& records) {
  enc::Vocabulary v;
  for (const auto& r : records)
    for (const auto& t : r.tokens) v.add(t);
  return v;
}

std::vector<train::LabeledSentence> to_sentences(const std::vector<DatasetRecord>& records,
                                                 const schema::LabelSchema& schema, const enc::Vocabulary& vocab) {
  std::vector<train::LabeledSentence> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    train::LabeledSentence s;
    s.input.id = r.id;
    s.input.ids = vocab.encode(r.tokens);
    s.graph = to_graph(r, schema);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hoie::data
