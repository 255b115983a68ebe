#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "hoie/numerics/ops.hpp"

// Functions built from the primitive ops. None of these add a node kind of
// their own, so their gradients come for free from the primitives.
namespace hoie::num {

// log Σ exp(v), max-shifted. Throws std::invalid_argument on empty input.
double logsumexp(std::span<const double> v);

Var scale(Var a, double c);
Var neg(Var a);
Var sub(Var a, Var b);

// relu(x) = x ∘ [x > 0] with the indicator held constant.
Var relu(Var a);
// tanh(x) = p0 − p1 with p = softmax([x, −x]).
Var tanh(Var a);
// sigmoid(x) = softmax([x, 0])[0].
Var sigmoid(Var a);

// The axis is removed.
Var logsumexp(Var a, int axis = -1);
Var mean(Var a, int axis);

// x·W + b; b broadcasts over leading axes of x.
Var affine(Var x, Var w, Var b);

// Inverted dropout, active only when the graph runs in training mode. The
// mask is a pure function of (graph seed, site), so repeated builds of the
// same graph see the same mask.
Var dropout(Var a, double rate, std::string_view site);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "param[index]"
  std::size_t checked = 0;
};

// Central finite differences over every scalar of every parameter in `store`
// against one reverse-mode pass. `build` constructs the scalar loss in the
// graph it is given; it is called once per perturbation.
GradCheckResult check_gradients(ParameterStore& store, const std::function<Var(Graph&)>& build, double step = 1e-5,
                                RunMode mode = RunMode::eval, std::uint64_t graph_seed = 0);

}  // namespace hoie::num
