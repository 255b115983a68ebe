#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "hoie/numerics/parameters.hpp"
#include "hoie/numerics/tensor.hpp"

namespace hoie::num {

struct GraphError : std::logic_error {
  using std::logic_error::logic_error;
};

// Dropout and other train-only behaviour key off the run mode.
enum class RunMode { eval, train };

class Graph;

// Handle to a node of a Graph. Cheap to copy; only valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  bool valid() const noexcept { return graph != nullptr && id >= 0; }
  const Tensor& value() const;
  const Shape& shape() const;
};

enum class Op : std::uint8_t {
  constant,
  parameter,
  add,
  mul,
  matmul,
  sum,
  softmax,
  log_softmax,
  exp,
  log,
  concat,
  take,
  reshape,
};

const char* op_name(Op op);

// Eager tape: every op computes its value when it is recorded, so the value
// of any Var is already its forward result. backward() replays the tape in
// reverse creation order, which is a topological order by construction.
class Graph {
 public:
  explicit Graph(RunMode mode = RunMode::eval, std::uint64_t seed = 0) : mode_(mode), seed_(seed) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  RunMode mode() const noexcept { return mode_; }
  bool training() const noexcept { return mode_ == RunMode::train; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  Var constant(Tensor value);
  Var scalar(double value) { return constant(Tensor::scalar(value)); }
  // Binds a parameter leaf; repeated calls for the same parameter return the same node.
  Var parameter(Parameter& param);

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;

  // Reverse-mode accumulation from a scalar root. Parameter gradients go to
  // `sink` when given, otherwise they are added into Parameter::grad.
  void backward(Var root, ParamGradients* sink = nullptr);

  struct Node {
    Op op = Op::constant;
    std::vector<int> inputs;
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    int axis = 0;
    bool flag = false;
    std::vector<std::size_t> index;
    Parameter* param = nullptr;
    std::uint64_t version = 0;

    // Parameter leaves read the stored value in place instead of copying it.
    const Tensor& val() const { return param ? param->value : value; }
  };

  Var record(Node node);
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

 private:
  void check_owned(Var v) const;
  void backward_node(Node& n);
  Tensor& ensure_grad(int id);

  RunMode mode_;
  std::uint64_t seed_;
  std::deque<Node> nodes_;  // deque: references to values survive later records
  std::vector<std::pair<Parameter*, int>> param_nodes_;
};

// The cached forward value of `root`.
const Tensor& forward(Var root);

}  // namespace hoie::num
