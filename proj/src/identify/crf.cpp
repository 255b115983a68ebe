#include "hoie/identify/crf.hpp"

#include <algorithm>
#include <stdexcept>

namespace hoie::ident {

using namespace hoie::num;

BioTagSet::BioTagSet(const schema::LabelSet& types) : types_(types.names()) {}

std::string BioTagSet::name(int tag) const {
  if (tag < 0 || static_cast<std::size_t>(tag) >= size()) throw std::out_of_range("tag id out of range");
  if (tag == 0) return "O";
  return (is_begin(tag) ? "B-" : "I-") + types_[static_cast<std::size_t>(type_of(tag))];
}

bool BioTagSet::allowed(int prev, int next) {
  if (!is_inside(next)) return true;
  return prev > 0 && type_of(prev) == type_of(next);
}

bool BioTagSet::valid(const std::vector<int>& tags) const {
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] < 0 || static_cast<std::size_t>(tags[t]) >= size()) return false;
    if (t == 0 ? is_inside(tags[0]) : !allowed(tags[t - 1], tags[t])) return false;
  }
  return true;
}

Tensor BioTagSet::allowed_mask() const {
  const std::size_t k = size();
  Tensor m({k, k});
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m.at(i, j) = allowed(static_cast<int>(i), static_cast<int>(j)) ? 1.0 : 0.0;
  return m;
}

Tensor BioTagSet::banned_pins() const {
  const std::size_t k = size();
  Tensor m({k, k});
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m.at(i, j) = allowed(static_cast<int>(i), static_cast<int>(j)) ? 0.0 : kBanned;
  return m;
}

std::vector<int> BioTagSet::encode(std::vector<std::pair<schema::Span, int>> spans, std::size_t n) const {
  std::stable_sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) { return a.first.start < b.first.start; });
  std::vector<int> tags(n, 0);
  int covered_to = -1;
  for (const auto& [span, type] : spans) {
    if (!span.valid_for(static_cast<int>(n))) throw std::out_of_range("span outside sentence");
    if (type < 0 || static_cast<std::size_t>(type) >= types_.size()) throw std::out_of_range("span type out of range");
    if (span.start <= covered_to) continue;
    tags[static_cast<std::size_t>(span.start)] = begin_tag(type);
    for (int t = span.start + 1; t <= span.end; ++t) tags[static_cast<std::size_t>(t)] = inside_tag(type);
    covered_to = span.end;
  }
  return tags;
}

namespace {

void check_shapes(const Tensor& em, const Tensor& a) {
  if (em.rank() != 2 || a.rank() != 2 || a.dim(0) != a.dim(1) || em.dim(1) != a.dim(0)) {
    throw ShapeError("CRF needs emissions [n,K] and transitions [K,K], got " + shape_string(em.shape()) + " and " +
                     shape_string(a.shape()));
  }
}

}  // namespace

double sequence_score(const std::vector<int>& tags, const Tensor& em, const Tensor& a) {
  check_shapes(em, a);
  if (tags.size() != em.dim(0)) throw std::invalid_argument("tag sequence length differs from sentence length");
  const std::size_t k = a.dim(0);
  double s = 0.0;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] < 0 || static_cast<std::size_t>(tags[t]) >= k) throw std::out_of_range("tag id out of range");
    s += em.at(t, static_cast<std::size_t>(tags[t]));
    if (t > 0) s += a.at(static_cast<std::size_t>(tags[t - 1]), static_cast<std::size_t>(tags[t]));
  }
  return s;
}

std::vector<int> viterbi_decode(const Tensor& em, const Tensor& a) {
  check_shapes(em, a);
  const std::size_t n = em.dim(0), k = a.dim(0);
  if (n == 0) return {};
  std::vector<double> delta(k), next(k);
  std::vector<std::vector<int>> back(n, std::vector<int>(k, 0));
  for (std::size_t j = 0; j < k; ++j) delta[j] = em.at(0, j);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      double best = delta[0] + a.at(0, j);
      int arg = 0;
      for (std::size_t i = 1; i < k; ++i) {
        const double v = delta[i] + a.at(i, j);
        if (v > best) {
          best = v;
          arg = static_cast<int>(i);
        }
      }
      next[j] = best + em.at(t, j);
      back[t][j] = arg;
    }
    std::swap(delta, next);
  }
  std::vector<int> tags(n);
  tags[n - 1] = static_cast<int>(std::max_element(delta.begin(), delta.end()) - delta.begin());
  for (std::size_t t = n - 1; t > 0; --t) tags[t - 1] = back[t][static_cast<std::size_t>(tags[t])];
  return tags;
}

double log_partition(const Tensor& em, const Tensor& a) {
  check_shapes(em, a);
  const std::size_t n = em.dim(0), k = a.dim(0);
  if (n == 0) return 0.0;
  std::vector<double> alpha(k), next(k), terms(k);
  for (std::size_t j = 0; j < k; ++j) alpha[j] = em.at(0, j);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < k; ++i) terms[i] = alpha[i] + a.at(i, j);
      next[j] = logsumexp(terms) + em.at(t, j);
    }
    std::swap(alpha, next);
  }
  return logsumexp(alpha);
}

double crf_nll(const std::vector<int>& gold, const Tensor& em, const Tensor& a, const BioTagSet& tags) {
  if (!tags.valid(gold)) throw std::invalid_argument("gold tag sequence is not valid BIO");
  return log_partition(em, a) - sequence_score(gold, em, a);
}

Var crf_nll(Var em, Var a, const std::vector<int>& gold, const BioTagSet& tags) {
  check_shapes(em.value(), a.value());
  if (!tags.valid(gold)) throw std::invalid_argument("gold tag sequence is not valid BIO");
  const std::size_t n = em.shape()[0], k = a.shape()[0];
  if (gold.size() != n) throw std::invalid_argument("tag sequence length differs from sentence length");
  if (k != tags.size()) throw ShapeError("transition size differs from tag set size");
  Graph& g = *em.graph;
  if (n == 0) return g.scalar(0.0);

  Tensor pick_em({n, k});
  Tensor pick_tr({k, k});
  for (std::size_t t = 0; t < n; ++t) {
    pick_em.at(t, static_cast<std::size_t>(gold[t])) = 1.0;
    if (t > 0) pick_tr.at(static_cast<std::size_t>(gold[t - 1]), static_cast<std::size_t>(gold[t])) += 1.0;
  }
  Var gold_score = add(sum_all(mul(em, g.constant(std::move(pick_em)))), sum_all(mul(a, g.constant(std::move(pick_tr)))));

  Var alpha = reshape(take(em, {0}), {k});
  for (std::size_t t = 1; t < n; ++t) {
    Var scores = add(reshape(alpha, {k, 1}), a);  // [prev, next]
    alpha = add(logsumexp(scores, 0), reshape(take(em, {t}), {k}));
  }
  return sub(logsumexp(alpha), gold_score);
}

std::vector<std::pair<schema::Span, int>> decode_spans(const std::vector<int>& tags) {
  std::vector<std::pair<schema::Span, int>> out;
  bool open = false;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    const int tag = tags[t];
    const int pos = static_cast<int>(t);
    if (tag <= 0) {
      open = false;
    } else if (BioTagSet::is_begin(tag) || !open || out.back().second != BioTagSet::type_of(tag)) {
      out.push_back({{pos, pos}, BioTagSet::type_of(tag)});
      open = true;
    } else {
      out.back().first.end = pos;
    }
  }
  return out;
}

}  // namespace hoie::ident
