#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "hoie/numerics/graph.hpp"

// The primitive op set. Binary arithmetic broadcasts numpy-style (shapes are
// right-aligned; size-1 and missing axes stretch). Every other differentiable
// function in the project is composed from these (see composite.hpp).
namespace hoie::num {

Var add(Var a, Var b);
Var mul(Var a, Var b);

// a: [..., k]; b: [k, n] (or [n, k] with transpose_b). Leading axes of `a` are batch axes.
Var matmul(Var a, Var b, bool transpose_b = false);

// Sum over one axis (negative counts from the end); the axis is removed.
Var sum(Var a, int axis);
Var sum_all(Var a);

// Over the last axis.
Var softmax(Var a);
Var log_softmax(Var a);

Var exp(Var a);
Var log(Var a);

Var concat(std::span<const Var> parts, int axis);
inline Var concat(std::initializer_list<Var> parts, int axis) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

// Embedding lookup: rows of `table` (axis 0) gathered in the given order.
Var take(Var table, std::vector<std::size_t> rows);

// Structural: same data, new shape.
Var reshape(Var a, Shape shape);

}  // namespace hoie::num
