#include "hoie/numerics/ops.hpp"

#include <cmath>
#include <limits>

#include "kernels.hpp"

namespace hoie::num {

namespace {

Graph& graph_of(Var a) {
  if (!a.valid()) throw GraphError("op on an invalid Var");
  return *a.graph;
}

Graph& graph_of(Var a, Var b) {
  Graph& g = graph_of(a);
  if (b.graph != a.graph) throw GraphError("op inputs belong to different graphs");
  return g;
}

Graph::Node make_node(Op op, std::initializer_list<int> inputs) {
  Graph::Node n;
  n.op = op;
  n.inputs.assign(inputs.begin(), inputs.end());
  return n;
}

void softmax_rows(const double* x, double* y, std::size_t rows, std::size_t n) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * n;
    double* yr = y + r * n;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, xr[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      z += yr[j];
    }
    for (std::size_t j = 0; j < n; ++j) yr[j] /= z;
  }
}

}  // namespace

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  auto plan = detail::plan_broadcast(av.shape(), bv.shape());
  Graph::Node n = make_node(Op::add, {a.id, b.id});
  n.value = Tensor(plan.out);
  double* o = n.value.data().data();
  const double* pa = av.data().data();
  const double* pb = bv.data().data();
  detail::for_each_broadcast(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) { o[i] = pa[ia] + pb[ib]; });
  return g.record(std::move(n));
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  auto plan = detail::plan_broadcast(av.shape(), bv.shape());
  Graph::Node n = make_node(Op::mul, {a.id, b.id});
  n.value = Tensor(plan.out);
  double* o = n.value.data().data();
  const double* pa = av.data().data();
  const double* pb = bv.data().data();
  detail::for_each_broadcast(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) { o[i] = pa[ia] * pb[ib]; });
  return g.record(std::move(n));
}

Var matmul(Var a, Var b, bool transpose_b) {
  Graph& g = graph_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() < 1 || bv.rank() != 2) {
    throw ShapeError("matmul needs [...,k] x [k,n], got " + shape_string(av.shape()) + " x " + shape_string(bv.shape()));
  }
  const std::size_t k = av.shape().back();
  const std::size_t bk = transpose_b ? bv.dim(1) : bv.dim(0);
  const std::size_t n_out = transpose_b ? bv.dim(0) : bv.dim(1);
  if (k != bk) {
    throw ShapeError("matmul inner dimension mismatch: " + shape_string(av.shape()) + " x " +
                     shape_string(bv.shape()) + (transpose_b ? "^T" : ""));
  }
  const std::size_t m = k == 0 ? shape_size(Shape(av.shape().begin(), av.shape().end() - 1)) : av.size() / k;
  Shape out_shape(av.shape().begin(), av.shape().end() - 1);
  out_shape.push_back(n_out);
  Graph::Node n = make_node(Op::matmul, {a.id, b.id});
  n.flag = transpose_b;
  n.value = Tensor(out_shape);
  detail::gemm(av.data().data(), bv.data().data(), n.value.data().data(), m, k, n_out, transpose_b);
  return g.record(std::move(n));
}

Var sum(Var a, int axis) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  const std::size_t ax = detail::normalize_axis(axis, av.rank());
  auto v = detail::axis_view(av.shape(), ax);
  Shape out_shape = av.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
  Graph::Node n = make_node(Op::sum, {a.id});
  n.axis = static_cast<int>(ax);
  n.value = Tensor(out_shape);
  const double* pa = av.data().data();
  double* o = n.value.data().data();
  for (std::size_t p = 0; p < v.outer; ++p)
    for (std::size_t j = 0; j < v.n; ++j) {
      const double* src = pa + (p * v.n + j) * v.inner;
      double* dst = o + p * v.inner;
      for (std::size_t i = 0; i < v.inner; ++i) dst[i] += src[i];
    }
  return g.record(std::move(n));
}

Var sum_all(Var a) {
  Graph& g = graph_of(a);
  Graph::Node n = make_node(Op::sum, {a.id});
  n.axis = -1;
  double s = 0.0;
  for (double x : a.value().data()) s += x;
  n.value = Tensor::scalar(s);
  return g.record(std::move(n));
}

Var softmax(Var a) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  if (av.rank() == 0) throw ShapeError("softmax of a scalar");
  const std::size_t cols = av.shape().back();
  Graph::Node n = make_node(Op::softmax, {a.id});
  n.value = Tensor(av.shape());
  if (cols > 0) softmax_rows(av.data().data(), n.value.data().data(), av.size() / cols, cols);
  return g.record(std::move(n));
}

Var log_softmax(Var a) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  if (av.rank() == 0) throw ShapeError("log_softmax of a scalar");
  const std::size_t cols = av.shape().back();
  Graph::Node n = make_node(Op::log_softmax, {a.id});
  n.value = Tensor(av.shape());
  if (cols > 0) {
    const std::size_t rows = av.size() / cols;
    const double* x = av.data().data();
    double* y = n.value.data().data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* xr = x + r * cols;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < cols; ++j) mx = std::max(mx, xr[j]);
      double z = 0.0;
      for (std::size_t j = 0; j < cols; ++j) z += std::exp(xr[j] - mx);
      const double lse = mx + std::log(z);
      for (std::size_t j = 0; j < cols; ++j) y[r * cols + j] = xr[j] - lse;
    }
  }
  return g.record(std::move(n));
}

Var exp(Var a) {
  Graph& g = graph_of(a);
  Graph::Node n = make_node(Op::exp, {a.id});
  n.value = Tensor(a.value().shape());
  auto src = a.value().data();
  auto dst = n.value.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::exp(src[i]);
  return g.record(std::move(n));
}

Var log(Var a) {
  Graph& g = graph_of(a);
  Graph::Node n = make_node(Op::log, {a.id});
  n.value = Tensor(a.value().shape());
  auto src = a.value().data();
  auto dst = n.value.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::log(src[i]);
  return g.record(std::move(n));
}

Var concat(std::span<const Var> parts, int axis) {
  if (parts.empty()) throw ShapeError("concat of no tensors");
  Graph& g = graph_of(parts[0]);
  const Shape& first = parts[0].value().shape();
  const std::size_t ax = detail::normalize_axis(axis, first.size());
  Shape out_shape = first;
  out_shape[ax] = 0;
  Graph::Node n;
  n.op = Op::concat;
  n.axis = static_cast<int>(ax);
  for (const Var& p : parts) {
    if (p.graph != &g) throw GraphError("concat inputs belong to different graphs");
    const Shape& s = p.value().shape();
    if (s.size() != first.size()) throw ShapeError("concat rank mismatch");
    for (std::size_t i = 0; i < s.size(); ++i)
      if (i != ax && s[i] != first[i])
        throw ShapeError("concat shape mismatch: " + shape_string(s) + " vs " + shape_string(first));
    out_shape[ax] += s[ax];
    n.inputs.push_back(p.id);
  }
  n.value = Tensor(out_shape);
  auto ov = detail::axis_view(out_shape, ax);
  std::size_t offset = 0;
  double* o = n.value.data().data();
  for (const Var& p : parts) {
    auto pv = detail::axis_view(p.value().shape(), ax);
    const double* src = p.value().data().data();
    for (std::size_t q = 0; q < pv.outer; ++q) {
      std::copy(src + q * pv.n * pv.inner, src + (q + 1) * pv.n * pv.inner,
                o + (q * ov.n + offset) * ov.inner);
    }
    offset += pv.n;
  }
  return g.record(std::move(n));
}

Var take(Var table, std::vector<std::size_t> rows) {
  Graph& g = graph_of(table);
  const Tensor& tv = table.value();
  if (tv.rank() < 1) throw ShapeError("take needs a table of rank >= 1");
  const std::size_t nrows = tv.dim(0);
  const std::size_t width = nrows == 0 ? shape_size(Shape(tv.shape().begin() + 1, tv.shape().end())) : tv.size() / nrows;
  Shape out_shape = tv.shape();
  out_shape[0] = rows.size();
  Graph::Node n = make_node(Op::take, {table.id});
  n.value = Tensor(out_shape);
  const double* src = tv.data().data();
  double* o = n.value.data().data();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= nrows) {
      throw ShapeError("take index " + std::to_string(rows[r]) + " out of range for " + std::to_string(nrows) + " rows");
    }
    std::copy(src + rows[r] * width, src + (rows[r] + 1) * width, o + r * width);
  }
  n.index = std::move(rows);
  return g.record(std::move(n));
}

Var reshape(Var a, Shape shape) {
  Graph& g = graph_of(a);
  Graph::Node n = make_node(Op::reshape, {a.id});
  n.value = a.value().reshaped(std::move(shape));
  return g.record(std::move(n));
}

}  // namespace hoie::num
