#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "egs/rng.hpp"
#include "egs/tensor.hpp"

namespace egs {

class ParameterStore;

// Tape-based reverse-mode autodiff over f64 tensors. A graph is built fresh
// for every forward pass; backward() walks the tape in reverse. Every op
// validates shapes and rejects non-finite results.
class Graph {
 public:
  using Var = std::size_t;

  Graph() = default;

  // Enables training-mode dropout; masks derive only from (seed, step), so a
  // rebuilt graph with the same seed/step reproduces them exactly.
  void enable_dropout(std::uint64_t seed, std::uint64_t step);

  Var input(Tensor value);                              // constant leaf
  Var param(ParameterStore& store, const std::string& name);

  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);     // a @ b^T
  Var add(Var a, Var b);           // same shape
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);           // elementwise
  Var add_rowvec(Var a, Var bias); // bias is 1 x cols(a)
  Var relu(Var a);
  Var sigmoid(Var a);
  Var log_sigmoid(Var a);
  Var softmax_rows(Var a);
  Var log_softmax_rows(Var a);
  Var layer_norm_rows(Var x, Var gain, Var bias);
  Var dropout(Var a, double p);
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  Var neg(Var a);
  Var slice_cols(Var a, std::size_t c0, std::size_t c1);  // half-open [c0, c1)
  Var concat_cols(const std::vector<Var>& parts);
  Var mean_rows(Var a);            // (m x n) -> (1 x n)
  Var mean_all(Var a);             // scalar
  Var sum_all(Var a);              // scalar
  Var pick(Var a, std::size_t r, std::size_t c);              // scalar a[r, c]
  Var sum_rows_at(Var a, std::vector<std::uint32_t> rows);    // column vec -> scalar

  const Tensor& value(Var v) const { return nodes_[v].value; }
  const Tensor& grad(Var v) const { return nodes_[v].grad; }
  double scalar(Var v) const;

  // Reverse pass from a scalar loss. Clears previous gradients first.
  void backward(Var loss);

  // Adds every parameter node's gradient into its store buffer.
  void accumulate_param_grads();

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad{false};
    std::function<void(Graph&, Node&)> back;  // null for leaves
    Tensor aux;                               // op-specific saved state
  };

  struct ParamBinding {
    Var var;
    ParameterStore* store;
    std::string name;
  };

  Var emplace(Tensor value, bool needs_grad, const char* op,
              std::function<void(Graph&, Node&)> back);
  Tensor& grad_buf(Var v);
  static void require(bool cond, const std::string& msg);

  std::vector<Node> nodes_;
  std::vector<ParamBinding> params_;
  std::optional<Rng> dropout_rng_;
};

}  // namespace egs
