#include <cmath>
#include <random>

#include "doctest.h"
#include "hoie/identify/identifier.hpp"

using namespace hoie;
using namespace hoie::num;
using namespace hoie::ident;
using schema::LabelSet;
using schema::Span;

namespace {

Tensor normal(Shape s, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Tensor t(std::move(s));
  for (double& v : t.data()) v = n(rng);
  return t;
}

// All k^n sequences; ties resolved by the lowest tag at the latest differing
// position, i.e. the reverse-lexicographically smallest maximizer.
std::vector<int> brute_force_argmax(const Tensor& em, const Tensor& a, double* best_score, double* log_z) {
  const std::size_t n = em.dim(0), k = a.dim(0);
  std::vector<int> y(n, 0), best;
  double best_s = -INFINITY;
  std::vector<double> all;
  while (true) {
    const double s = sequence_score(y, em, a);
    all.push_back(s);
    bool better = s > best_s;
    if (s == best_s) {
      for (std::size_t t = n; t-- > 0;)
        if (y[t] != best[t]) {
          better = y[t] < best[t];
          break;
        }
    }
    if (better) {
      best_s = s;
      best = y;
    }
    std::size_t t = 0;
    while (t < n && ++y[t] == static_cast<int>(k)) y[t++] = 0;
    if (t == n) break;
  }
  *best_score = best_s;
  // log Σ exp with a long-double accumulator
  double mx = *std::max_element(all.begin(), all.end());
  long double acc = 0;
  for (double s : all) acc += std::exp(static_cast<long double>(s - mx));
  *log_z = mx + static_cast<double>(std::log(acc));
  return best;
}

}  // namespace

TEST_CASE("tag set layout") {
  BioTagSet tags(LabelSet({"PER", "ORG"}));
  CHECK(tags.size() == 5);
  CHECK(tags.name(0) == "O");
  CHECK(tags.name(1) == "B-PER");
  CHECK(tags.name(4) == "I-ORG");
  CHECK(tags.valid({1, 2, 0, 3, 4}));
  CHECK_FALSE(tags.valid({2}));
  CHECK_FALSE(tags.valid({1, 4}));
  Tensor pins = tags.banned_pins();
  CHECK(pins.at(0, 2) == BioTagSet::kBanned);
  CHECK(pins.at(1, 2) == 0.0);
  CHECK(pins.at(3, 2) == BioTagSet::kBanned);
}

TEST_CASE("sequence_score examples") {
  Tensor zero2({2, 2});
  CHECK(sequence_score({0}, Tensor::matrix(1, 2, {1, 0}), zero2) == 1.0);
  Tensor em = Tensor::matrix(2, 2, {1, 0, 0, 1});
  CHECK(sequence_score({0, 1}, em, zero2) == 2.0);
  Tensor a = zero2;
  a.at(0, 1) = 0.5;
  CHECK(sequence_score({0, 1}, em, a) == 2.5);
  CHECK_THROWS_AS(sequence_score({0, 2}, em, a), std::out_of_range);
}

TEST_CASE("viterbi and partition examples") {
  Tensor zero2({2, 2});
  CHECK(viterbi_decode(Tensor::matrix(1, 3, {0.1, 0.7, -1}), Tensor({3, 3})) == std::vector<int>{1});
  Tensor em = Tensor::matrix(2, 2, {1, 0, 0, 1});
  CHECK(viterbi_decode(em, zero2) == std::vector<int>{0, 1});
  CHECK(log_partition(Tensor::matrix(1, 2, {0, 0}), zero2) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const double four_paths = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(0.0) + std::exp(1.0));
  CHECK(log_partition(em, zero2) == doctest::Approx(four_paths).epsilon(1e-15));
  // ties: uniform scores pick all-zero
  CHECK(viterbi_decode(Tensor({3, 3}), Tensor({3, 3})) == std::vector<int>{0, 0, 0});
}

TEST_CASE("crf_nll examples") {
  BioTagSet tags(LabelSet({"A"}));
  CHECK(crf_nll({0}, Tensor({1, 3}), Tensor({3, 3}), tags) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK_THROWS_AS(crf_nll({2, 0}, Tensor({2, 3}), Tensor({3, 3}), tags), std::invalid_argument);
  // Only the gold sequence avoids every pin: the loss vanishes as the pin grows.
  Tensor em({2, 3});
  Tensor a({3, 3}, -1e4);
  a.at(1, 2) = 0.0;
  CHECK(crf_nll({1, 2}, em, a, tags) < 1e-300 + 1e-12);
}

TEST_CASE("property: viterbi and log partition agree with enumeration") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 6, k = 1 + rng() % 4;
    Tensor em = normal({n, k}, rng), a = normal({k, k}, rng);
    double best, log_z;
    auto expect = brute_force_argmax(em, a, &best, &log_z);
    auto got = viterbi_decode(em, a);
    CHECK(got == expect);
    CHECK(sequence_score(got, em, a) == best);
    CHECK(std::abs(log_partition(em, a) - log_z) <= 1e-8);
    // normalization: Σ exp(score − log Z) = 1
    std::vector<int> y(n, 0);
    long double total = 0;
    const double lz = log_partition(em, a);
    while (true) {
      total += std::exp(static_cast<long double>(sequence_score(y, em, a) - lz));
      std::size_t t = 0;
      while (t < n && ++y[t] == static_cast<int>(k)) y[t++] = 0;
      if (t == n) break;
    }
    CHECK(std::abs(static_cast<double>(total) - 1.0) <= 1e-8);
  }
}

TEST_CASE("graph crf_nll equals the plain recursion and passes a gradient check") {
  std::mt19937_64 rng(2);
  BioTagSet tags(LabelSet({"A", "B"}));
  ParameterStore store(1);
  Parameter& em = store.create("em", {4, 5}, ParamGroup::other, Init::zeros);
  Parameter& a = store.create("a", {5, 5}, ParamGroup::other, Init::zeros);
  em.value = normal({4, 5}, rng);
  a.value = normal({5, 5}, rng);
  std::vector<int> gold{1, 2, 0, 3};
  {
    Graph g;
    double v = crf_nll(g.parameter(em), g.parameter(a), gold, tags).value().item();
    CHECK(v == doctest::Approx(crf_nll(gold, em.value, a.value, tags)).epsilon(1e-12));
    CHECK(v >= 0.0);
  }
  auto res = check_gradients(store, [&](Graph& g) { return crf_nll(g.parameter(em), g.parameter(a), gold, tags); });
  CHECK(res.max_rel_error <= 1e-4);
}

TEST_CASE("decode_spans examples and round trip") {
  BioTagSet tags(LabelSet({"PER", "ORG"}));
  using Spans = std::vector<std::pair<Span, int>>;
  CHECK(decode_spans({1, 2, 0}) == Spans{{{0, 1}, 0}});
  CHECK(decode_spans({0, 0}).empty());
  CHECK(decode_spans({4, 1}) == Spans{{{0, 0}, 1}, {{1, 1}, 0}});
  CHECK(decode_spans({1, 4}) == Spans{{{0, 0}, 0}, {{1, 1}, 1}});
  CHECK(decode_spans({1, 1}) == Spans{{{0, 0}, 0}, {{1, 1}, 0}});

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Spans gold;
    int pos = static_cast<int>(rng() % 2);
    while (pos < 12) {
      int len = 1 + static_cast<int>(rng() % 3);
      if (pos + len > 12) break;
      gold.push_back({{pos, pos + len - 1}, static_cast<int>(rng() % 2)});
      pos += len + static_cast<int>(rng() % 3);
    }
    auto encoded = tags.encode(gold, 12);
    CHECK(tags.valid(encoded));
    CHECK(decode_spans(encoded) == gold);
  }
}

TEST_CASE("identifier loss gradient and prediction shape") {
  auto schema = schema::LabelSchema::make({"Attack"}, {"PER", "ORG"}, {"Attacker"}, {"PER-SOC"});
  IdentifierConfig cfg;
  cfg.encoder = {enc::EncoderMode::trainable, 8, 3, 1, 1};
  cfg.dropout = 0.3;
  ParameterStore store(5);
  Identifier model(cfg, schema, store);
  enc::SentenceInput s{"s", {2, 5, 3, 7}};
  IdentifiedSpans gold{{{{1, 1}, 0}}, {{{0, 0}, 1}, {{2, 3}, 0}}};
  auto targets = model.targets(gold, 4);
  CHECK(targets.entities == std::vector<int>{3, 0, 1, 2});
  auto res = check_gradients(store, [&](Graph& g) { return model.loss(g, s, targets); }, 1e-5, RunMode::train, 9);
  CHECK(res.max_rel_error <= 1e-4);
  auto pred = model.predict(s);
  for (const auto& [span, type] : pred.entities) CHECK(span.valid_for(4));
}
