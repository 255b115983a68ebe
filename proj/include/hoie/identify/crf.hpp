#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hoie/numerics/composite.hpp"
#include "hoie/schema/instance.hpp"

namespace hoie::ident {

// O = 0, then B-X = 1 + 2x and I-X = 2 + 2x for type x.
class BioTagSet {
 public:
  static constexpr double kBanned = -1e4;

  BioTagSet() = default;
  explicit BioTagSet(const schema::LabelSet& types);

  std::size_t size() const noexcept { return 2 * types_.size() + 1; }
  std::size_t type_count() const noexcept { return types_.size(); }
  std::string name(int tag) const;
  static int begin_tag(int type) { return 1 + 2 * type; }
  static int inside_tag(int type) { return 2 + 2 * type; }
  static bool is_begin(int tag) { return tag > 0 && tag % 2 == 1; }
  static bool is_inside(int tag) { return tag > 0 && tag % 2 == 0; }
  static int type_of(int tag) { return (tag - 1) / 2; }

  // I-X may only follow B-X or I-X.
  static bool allowed(int prev, int next);
  bool valid(const std::vector<int>& tags) const;

  // [K, K] masks: 1 where allowed; kBanned where banned, 0 elsewhere.
  num::Tensor allowed_mask() const;
  num::Tensor banned_pins() const;

  // Non-overlapping spans only; a span overlapping an earlier one (in start
  // order) is dropped.
  std::vector<int> encode(std::vector<std::pair<schema::Span, int>> spans, std::size_t n) const;

 private:
  std::vector<std::string> types_;
};

// emissions: [n, K]; transitions: [K, K], A[prev][next].
double sequence_score(const std::vector<int>& tags, const num::Tensor& emissions, const num::Tensor& transitions);
std::vector<int> viterbi_decode(const num::Tensor& emissions, const num::Tensor& transitions);
double log_partition(const num::Tensor& emissions, const num::Tensor& transitions);
// Throws std::invalid_argument when `gold` is not a valid BIO sequence.
double crf_nll(const std::vector<int>& gold, const num::Tensor& emissions, const num::Tensor& transitions,
               const BioTagSet& tags);

// Differentiable NLL through the forward recursion.
num::Var crf_nll(num::Var emissions, num::Var transitions, const std::vector<int>& gold, const BioTagSet& tags);

// Maximal B-X (I-X)* runs become spans of type X; a stray I-X opens a new span.
std::vector<std::pair<schema::Span, int>> decode_spans(const std::vector<int>& tags);

}  // namespace hoie::ident
