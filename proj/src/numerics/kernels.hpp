#pragma once

// Loop kernels shared by the forward ops and their adjoints.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "hoie/numerics/tensor.hpp"

namespace hoie::num::detail {

struct BroadcastPlan {
  enum class Kind { same, a_tiles, b_tiles, general };
  Kind kind = Kind::same;
  Shape out;
  std::size_t size = 0;
  std::size_t a_size = 0;
  std::size_t b_size = 0;
  // per output axis; 0 where the operand is broadcast
  std::vector<std::size_t> a_strides;
  std::vector<std::size_t> b_strides;
};

inline bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.begin(), small.end(), big.end() - static_cast<std::ptrdiff_t>(small.size()));
}

inline BroadcastPlan plan_broadcast(const Shape& a, const Shape& b) {
  BroadcastPlan p;
  p.a_size = shape_size(a);
  p.b_size = shape_size(b);
  std::size_t rank = std::max(a.size(), b.size());
  p.out.assign(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    std::size_t da = i + a.size() >= rank ? a[i + a.size() - rank] : 1;
    std::size_t db = i + b.size() >= rank ? b[i + b.size() - rank] : 1;
    if (da != db && da != 1 && db != 1) {
      throw ShapeError("cannot broadcast " + shape_string(a) + " with " + shape_string(b));
    }
    p.out[i] = da == 1 ? db : da;
  }
  p.size = shape_size(p.out);

  if (a == b) {
    p.kind = BroadcastPlan::Kind::same;
  } else if (a == p.out && is_suffix(b, a) && p.b_size > 0) {
    p.kind = BroadcastPlan::Kind::b_tiles;
  } else if (b == p.out && is_suffix(a, b) && p.a_size > 0) {
    p.kind = BroadcastPlan::Kind::a_tiles;
  } else {
    p.kind = BroadcastPlan::Kind::general;
    p.a_strides.assign(rank, 0);
    p.b_strides.assign(rank, 0);
    std::size_t sa = 1, sb = 1;
    for (std::size_t k = rank; k-- > 0;) {
      std::size_t da = k + a.size() >= rank ? a[k + a.size() - rank] : 1;
      std::size_t db = k + b.size() >= rank ? b[k + b.size() - rank] : 1;
      p.a_strides[k] = da == 1 ? 0 : sa;
      p.b_strides[k] = db == 1 ? 0 : sb;
      sa *= da;
      sb *= db;
    }
  }
  return p;
}

// Calls fn(out_index, a_index, b_index) for every output element.
template <class Fn>
void for_each_broadcast(const BroadcastPlan& p, Fn&& fn) {
  using Kind = BroadcastPlan::Kind;
  switch (p.kind) {
    case Kind::same:
      for (std::size_t i = 0; i < p.size; ++i) fn(i, i, i);
      return;
    case Kind::b_tiles:
      for (std::size_t i = 0, j = 0; i < p.size; ++i) {
        fn(i, i, j);
        if (++j == p.b_size) j = 0;
      }
      return;
    case Kind::a_tiles:
      for (std::size_t i = 0, j = 0; i < p.size; ++i) {
        fn(i, j, i);
        if (++j == p.a_size) j = 0;
      }
      return;
    case Kind::general:
      break;
  }
  if (p.size == 0) return;
  const std::size_t rank = p.out.size();
  std::vector<std::size_t> idx(rank, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t o = 0; o < p.size; ++o) {
    fn(o, ia, ib);
    for (std::size_t k = rank; k-- > 0;) {
      ia += p.a_strides[k];
      ib += p.b_strides[k];
      if (++idx[k] < p.out[k]) break;
      ia -= p.a_strides[k] * p.out[k];
      ib -= p.b_strides[k] * p.out[k];
      idx[k] = 0;
    }
  }
}

// View of a shape around one axis as [outer, n, inner].
struct AxisView {
  std::size_t outer = 1, n = 1, inner = 1;
};

inline AxisView axis_view(const Shape& s, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= s[i];
  v.n = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) v.inner *= s[i];
  return v;
}

inline std::size_t normalize_axis(int axis, std::size_t rank) {
  int r = static_cast<int>(rank);
  int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " + std::to_string(rank));
  return static_cast<std::size_t>(a);
}

// One R x C output tile: each sum runs over p in order and lands in out with a
// single addition, whatever the tiling.
template <std::size_t R, std::size_t C>
inline void gemm_tile(const double* a, const double* b, double* out, std::size_t k, std::size_t n) {
  double c[R][C] = {};
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b + p * n;
    for (std::size_t r = 0; r < R; ++r) {
      const double av = a[r * k + p];
      for (std::size_t j = 0; j < C; ++j) c[r][j] += av * brow[j];
    }
  }
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t j = 0; j < C; ++j) out[r * n + j] += c[r][j];
}

template <std::size_t R>
inline void gemm_rows(const double* a, const double* b, double* out, std::size_t k, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) gemm_tile<R, 4>(a, b + j, out + j, k, n);
  for (; j < n; ++j) gemm_tile<R, 1>(a, b + j, out + j, k, n);
}

// out[m, n] += a[m, k] * b, with b stored [k, n] or, if tb, [n, k] (transposed
// once up front).
inline void gemm(const double* a, const double* b, double* out, std::size_t m, std::size_t k, std::size_t n, bool tb) {
  std::vector<double> bt;
  if (tb) {
    bt.resize(k * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
    b = bt.data();
  }
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) gemm_rows<4>(a + i * k, b, out + i * n, k, n);
  for (; i < m; ++i) gemm_rows<1>(a + i * k, b, out + i * n, k, n);
}

}  // namespace hoie::num::detail
