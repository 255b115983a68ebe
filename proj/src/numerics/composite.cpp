#include "hoie/numerics/composite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "hoie/numerics/rng.hpp"

namespace hoie::num {

double logsumexp(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("logsumexp of an empty vector");
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

Var scale(Var a, double c) { return mul(a, a.graph->scalar(c)); }

Var neg(Var a) { return scale(a, -1.0); }

Var sub(Var a, Var b) { return add(a, neg(b)); }

Var relu(Var a) {
  Tensor mask(a.shape());
  auto src = a.value().data();
  for (std::size_t i = 0; i < src.size(); ++i) mask[i] = src[i] > 0.0 ? 1.0 : 0.0;
  return mul(a, a.graph->constant(std::move(mask)));
}

namespace {

// [..., 1] view of a, so it can be paired with a second channel on a new last axis.
Var with_channel(Var a) {
  Shape s = a.shape();
  s.push_back(1);
  return reshape(a, std::move(s));
}

Var pick_channels(Var pairs, std::vector<double> weights) {
  Graph& g = *pairs.graph;
  return sum(mul(pairs, g.constant(Tensor::vector(std::move(weights)))), -1);
}

}  // namespace

Var tanh(Var a) {
  Var x = with_channel(a);
  return pick_channels(softmax(concat({x, neg(x)}, -1)), {1.0, -1.0});
}

Var sigmoid(Var a) {
  Var x = with_channel(a);
  Var zero = a.graph->constant(Tensor(x.shape()));
  return pick_channels(softmax(concat({x, zero}, -1)), {1.0, 0.0});
}

Var logsumexp(Var a, int axis) {
  const Tensor& v = a.value();
  const int rank = static_cast<int>(v.rank());
  const int ax = axis < 0 ? axis + rank : axis;
  if (ax < 0 || ax >= rank) throw ShapeError("logsumexp axis out of range");
  const Shape& s = v.shape();
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < ax; ++i) outer *= s[static_cast<std::size_t>(i)];
  for (int i = ax + 1; i < rank; ++i) inner *= s[static_cast<std::size_t>(i)];
  const std::size_t n = s[static_cast<std::size_t>(ax)];
  if (n == 0) throw ShapeError("logsumexp over an empty axis");

  Shape reduced = s;
  reduced.erase(reduced.begin() + ax);
  Tensor shift(reduced, -std::numeric_limits<double>::infinity());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < inner; ++i)
        shift[o * inner + i] = std::max(shift[o * inner + i], v[(o * n + j) * inner + i]);
  Shape kept = s;
  kept[static_cast<std::size_t>(ax)] = 1;
  Graph& g = *a.graph;
  Var shifted = sub(a, g.constant(shift.reshaped(kept)));
  return add(log(sum(exp(shifted), ax)), g.constant(std::move(shift)));
}

Var mean(Var a, int axis) {
  const std::size_t rank = a.value().rank();
  const int ax = axis < 0 ? axis + static_cast<int>(rank) : axis;
  if (ax < 0 || ax >= static_cast<int>(rank)) throw ShapeError("mean axis out of range");
  const std::size_t n = a.shape()[static_cast<std::size_t>(ax)];
  if (n == 0) throw ShapeError("mean over an empty axis");
  return scale(sum(a, ax), 1.0 / static_cast<double>(n));
}

Var affine(Var x, Var w, Var b) { return add(matmul(x, w), b); }

Var dropout(Var a, double rate, std::string_view site) {
  Graph& g = *a.graph;
  if (!g.training() || rate <= 0.0) return a;
  if (rate >= 1.0) throw std::invalid_argument("dropout rate must be < 1");
  Rng rng(derive_seed(g.seed(), site));
  std::bernoulli_distribution keep(1.0 - rate);
  Tensor mask(a.shape());
  const double kept = 1.0 / (1.0 - rate);
  for (double& m : mask.data()) m = keep(rng) ? kept : 0.0;
  return mul(a, g.constant(std::move(mask)));
}

GradCheckResult check_gradients(ParameterStore& store, const std::function<Var(Graph&)>& build, double step,
                                RunMode mode, std::uint64_t graph_seed) {
  ParamGradients grads;
  {
    Graph g(mode, graph_seed);
    Var loss = build(g);
    g.backward(loss, &grads);
  }
  auto analytic = [&](const Parameter* p, std::size_t i) {
    double s = 0.0;
    for (const auto& [q, t] : grads)
      if (q == p) s += t[i];
    return s;
  };
  auto eval = [&] {
    Graph g(mode, graph_seed);
    return build(g).value().item();
  };

  GradCheckResult result;
  for (auto& holder : store) {
    Parameter& p = *holder;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double orig = p.value[i];
      p.value[i] = orig + step;
      ++p.version;
      const double up = eval();
      p.value[i] = orig - step;
      ++p.version;
      const double down = eval();
      p.value[i] = orig;
      ++p.version;
      const double numeric = (up - down) / (2.0 * step);
      const double exact = analytic(&p, i);
      const double denom = std::max({std::abs(numeric), std::abs(exact), 1e-6});
      const double rel = std::abs(numeric - exact) / denom;
      ++result.checked;
      if (rel > result.max_rel_error || result.worst.empty()) {
        if (rel >= result.max_rel_error) {
          result.max_rel_error = rel;
          result.worst = p.name + "[" + std::to_string(i) + "]";
        }
      }
    }
  }
  return result;
}

}  // namespace hoie::num
