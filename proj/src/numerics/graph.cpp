#include "hoie/numerics/graph.hpp"

#include <cmath>
#include <string>

#include "kernels.hpp"

namespace hoie::num {

const char* op_name(Op op) {
  switch (op) {
    case Op::constant: return "constant";
    case Op::parameter: return "parameter";
    case Op::add: return "add";
    case Op::mul: return "mul";
    case Op::matmul: return "matmul";
    case Op::sum: return "sum";
    case Op::softmax: return "softmax";
    case Op::log_softmax: return "log_softmax";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::concat: return "concat";
    case Op::take: return "take";
    case Op::reshape: return "reshape";
  }
  return "?";
}

const Tensor& Var::value() const {
  if (!valid()) throw GraphError("value of an invalid Var");
  return graph->value(*this);
}

const Shape& Var::shape() const { return value().shape(); }

const Tensor& forward(Var root) { return root.value(); }

Var Graph::constant(Tensor value) {
  Node n;
  n.op = Op::constant;
  n.value = std::move(value);
  return record(std::move(n));
}

Var Graph::parameter(Parameter& param) {
  for (const auto& [p, id] : param_nodes_)
    if (p == &param) return Var{this, id};
  Node n;
  n.op = Op::parameter;
  n.param = &param;
  n.version = param.version;
  Var v = record(std::move(n));
  param_nodes_.emplace_back(&param, v.id);
  return v;
}

Var Graph::record(Node node) {
  if (node.op != Op::parameter && !node.value.all_finite()) {
    throw NonFiniteError(std::string("non-finite value produced by ") + op_name(node.op) + " with shape " +
                         shape_string(node.value.shape()));
  }
  if (node.op == Op::parameter) {
    node.needs_grad = true;
  } else {
    for (int in : node.inputs)
      if (nodes_[static_cast<std::size_t>(in)].needs_grad) node.needs_grad = true;
  }
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

void Graph::check_owned(Var v) const {
  if (v.graph != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw GraphError("Var does not belong to this graph");
  }
}

const Tensor& Graph::value(Var v) const {
  check_owned(v);
  return nodes_[static_cast<std::size_t>(v.id)].val();
}

const Tensor& Graph::grad(Var v) const {
  check_owned(v);
  return nodes_[static_cast<std::size_t>(v.id)].grad;
}

Tensor& Graph::ensure_grad(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  const Tensor& v = n.val();
  if (n.grad.shape() != v.shape() || n.grad.size() != v.size()) n.grad = Tensor(v.shape());
  return n.grad;
}

void Graph::backward(Var root, ParamGradients* sink) {
  check_owned(root);
  if (nodes_[static_cast<std::size_t>(root.id)].val().size() != 1) {
    throw GraphError("backward root must be a scalar, got shape " +
                     shape_string(nodes_[static_cast<std::size_t>(root.id)].val().shape()));
  }
  for (const auto& [p, id] : param_nodes_) {
    if (p->version != nodes_[static_cast<std::size_t>(id)].version) {
      throw GraphError("parameter '" + p->name + "' changed after the graph was built");
    }
  }
  std::vector<bool> live(nodes_.size(), false);
  for (auto& n : nodes_) n.grad = Tensor();
  ensure_grad(root.id)[0] = 1.0;
  live[static_cast<std::size_t>(root.id)] = true;

  for (int id = root.id; id >= 0; --id) {
    if (!live[static_cast<std::size_t>(id)]) continue;
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || n.op == Op::constant || n.op == Op::parameter) continue;
    for (int in : n.inputs)
      if (nodes_[static_cast<std::size_t>(in)].needs_grad) {
        ensure_grad(in);
        live[static_cast<std::size_t>(in)] = true;
      }
    backward_node(n);
  }

  for (const auto& [p, id] : param_nodes_) {
    if (!live[static_cast<std::size_t>(id)]) continue;
    const Tensor& g = nodes_[static_cast<std::size_t>(id)].grad;
    if (sink) {
      sink->emplace_back(p, g);
    } else {
      auto dst = p->grad.data();
      auto src = g.data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
}

// Adds the contribution of n.grad into the grads of n's inputs.
void Graph::backward_node(Node& n) {
  auto input = [&](std::size_t k) -> Node& { return nodes_[static_cast<std::size_t>(n.inputs[k])]; };
  const double* g = n.grad.data().data();

  switch (n.op) {
    case Op::constant:
    case Op::parameter:
      return;

    case Op::add:
    case Op::mul: {
      Node& a = input(0);
      Node& b = input(1);
      auto plan = detail::plan_broadcast(a.val().shape(), b.val().shape());
      double* ga = a.needs_grad ? a.grad.data().data() : nullptr;
      double* gb = b.needs_grad ? b.grad.data().data() : nullptr;
      if (n.op == Op::add) {
        detail::for_each_broadcast(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
          if (ga) ga[ia] += g[i];
          if (gb) gb[ib] += g[i];
        });
      } else {
        const double* pa = a.val().data().data();
        const double* pb = b.val().data().data();
        detail::for_each_broadcast(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
          if (ga) ga[ia] += g[i] * pb[ib];
          if (gb) gb[ib] += g[i] * pa[ia];
        });
      }
      return;
    }

    case Op::matmul: {
      Node& a = input(0);
      Node& b = input(1);
      const bool tb = n.flag;
      const std::size_t k = a.val().shape().back();
      const std::size_t nn = n.value.shape().back();
      const std::size_t m = nn == 0 ? (k == 0 ? 0 : a.val().size() / k) : n.value.size() / nn;
      const double* pa = a.val().data().data();
      const double* pb = b.val().data().data();
      if (a.needs_grad) {
        // dA[m,k] += G[m,n] * B^T   (B stored [k,n]) or G * Bs (Bs stored [n,k])
        double* ga = a.grad.data().data();
        if (!tb) {
          detail::gemm(g, pb, ga, m, nn, k, true);
        } else {
          detail::gemm(g, pb, ga, m, nn, k, false);
        }
      }
      if (b.needs_grad) {
        double* gb = b.grad.data().data();
        if (!tb) {
          // dB[k,n] += A^T G
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double av = pa[i * k + p];
              if (av == 0.0) continue;
              for (std::size_t j = 0; j < nn; ++j) gb[p * nn + j] += av * g[i * nn + j];
            }
        } else {
          // dBs[n,k] += G^T A
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < nn; ++j) {
              const double gv = g[i * nn + j];
              if (gv == 0.0) continue;
              for (std::size_t p = 0; p < k; ++p) gb[j * k + p] += gv * pa[i * k + p];
            }
        }
      }
      return;
    }

    case Op::sum: {
      Node& a = input(0);
      double* ga = a.grad.data().data();
      if (n.axis < 0) {
        for (std::size_t i = 0; i < a.val().size(); ++i) ga[i] += g[0];
        return;
      }
      auto v = detail::axis_view(a.val().shape(), static_cast<std::size_t>(n.axis));
      for (std::size_t p = 0; p < v.outer; ++p)
        for (std::size_t j = 0; j < v.n; ++j) {
          double* dst = ga + (p * v.n + j) * v.inner;
          const double* src = g + p * v.inner;
          for (std::size_t i = 0; i < v.inner; ++i) dst[i] += src[i];
        }
      return;
    }

    case Op::softmax: {
      Node& a = input(0);
      const std::size_t cols = n.value.shape().back();
      if (cols == 0) return;
      const std::size_t rows = n.value.size() / cols;
      const double* y = n.value.data().data();
      double* ga = a.grad.data().data();
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t j = 0; j < cols; ++j) dot += g[r * cols + j] * y[r * cols + j];
        for (std::size_t j = 0; j < cols; ++j) ga[r * cols + j] += y[r * cols + j] * (g[r * cols + j] - dot);
      }
      return;
    }

    case Op::log_softmax: {
      Node& a = input(0);
      const std::size_t cols = n.value.shape().back();
      if (cols == 0) return;
      const std::size_t rows = n.value.size() / cols;
      const double* y = n.value.data().data();
      double* ga = a.grad.data().data();
      for (std::size_t r = 0; r < rows; ++r) {
        double gs = 0.0;
        for (std::size_t j = 0; j < cols; ++j) gs += g[r * cols + j];
        for (std::size_t j = 0; j < cols; ++j) ga[r * cols + j] += g[r * cols + j] - std::exp(y[r * cols + j]) * gs;
      }
      return;
    }

    case Op::exp: {
      Node& a = input(0);
      const double* y = n.value.data().data();
      double* ga = a.grad.data().data();
      for (std::size_t i = 0; i < n.value.size(); ++i) ga[i] += g[i] * y[i];
      return;
    }

    case Op::log: {
      Node& a = input(0);
      const double* x = a.val().data().data();
      double* ga = a.grad.data().data();
      for (std::size_t i = 0; i < n.value.size(); ++i) ga[i] += g[i] / x[i];
      return;
    }

    case Op::concat: {
      const std::size_t ax = static_cast<std::size_t>(n.axis);
      auto ov = detail::axis_view(n.value.shape(), ax);
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        Node& p = input(k);
        auto pv = detail::axis_view(p.val().shape(), ax);
        if (p.needs_grad) {
          double* gp = p.grad.data().data();
          for (std::size_t q = 0; q < pv.outer; ++q) {
            const double* src = g + (q * ov.n + offset) * ov.inner;
            double* dst = gp + q * pv.n * pv.inner;
            for (std::size_t i = 0; i < pv.n * pv.inner; ++i) dst[i] += src[i];
          }
        }
        offset += pv.n;
      }
      return;
    }

    case Op::take: {
      Node& t = input(0);
      const std::size_t rows = n.index.size();
      if (rows == 0) return;
      const std::size_t width = n.value.size() / rows;
      double* gt = t.grad.data().data();
      for (std::size_t r = 0; r < rows; ++r) {
        double* dst = gt + n.index[r] * width;
        const double* src = g + r * width;
        for (std::size_t i = 0; i < width; ++i) dst[i] += src[i];
      }
      return;
    }

    case Op::reshape: {
      Node& a = input(0);
      double* ga = a.grad.data().data();
      for (std::size_t i = 0; i < n.value.size(); ++i) ga[i] += g[i];
      return;
    }
  }
}

}  // namespace hoie::num
