#pragma once

#include "hoie/data/dataset.hpp"
#include "hoie/encoder/vocab.hpp"
#include "hoie/training/labeler.hpp"

namespace hoie::data {

// Every token of `records`, in first-seen order after the reserved entries.
enc::Vocabulary build_vocabulary(const std::vector<DatasetRecord>& records);

// Gold graphs plus token ids; words outside `vocab` map to the unknown id.
std::vector<train::LabeledSentence> to_sentences(const std::vector<DatasetRecord>& records,
                                                 const schema::LabelSchema& schema, const enc::Vocabulary& vocab);

}  // namespace hoie::data
