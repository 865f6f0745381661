#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "jointgen/parameters.hpp"
#include "jointgen/tensor.hpp"

namespace jointgen {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  std::size_t size() const { return value().size(); }
};

/// Computation record for reverse-mode differentiation.
///
/// Every operation appends one node holding its forward value and a closure
/// that pushes the node's gradient into its inputs. Nodes are appended in
/// execution order, so one reverse sweep is a valid topological order.
/// Parameter leaves alias the parameter's storage and accumulate straight
/// into Parameter::gradient.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = delete;
  Tape& operator=(Tape&&) = delete;

  Var constant(Tensor value);
  /// Leaf bound to a parameter; repeated calls return the same node.
  Var parameter(Parameter& param);

  const Tensor& value(Var v) const;
  /// Gradient buffer of a node, allocated (zeroed) on first access.
  Tensor& grad(Var v);
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Records an operation result. `backward` runs at most once per
  /// backward pass and only when the node received gradient.
  Var record(Tensor value, bool requires_grad, std::function<void()> backward);

  /// Populates gradients of every reachable parameter with d(loss)/d(param),
  /// adding to whatever the parameter gradients already hold. Returns the
  /// number of recorded operations whose backward rule ran.
  std::size_t backward(Var loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    bool requires_grad = false;
    std::function<void()> backward;
  };

  std::deque<Node> nodes_;  // stable references across appends
  std::vector<std::pair<const Parameter*, std::size_t>> param_nodes_;
};

/// Differentiable operations. All inputs of one call must share a tape.
namespace ad {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, Real factor);
/// 1 - a, elementwise.
Var one_minus(Var a);
/// Elementwise product with a constant tensor (dropout masks).
Var mul_constant(Var a, const Tensor& factor);
/// a * s for a scalar (shape {1}) variable s.
Var scale_by(Var a, Var s);

Var matmul(Var a, Var b);
/// a[m x k] times b[n x k] transposed -> [m x n].
Var matmul_nt(Var a, Var b);
/// W[m x n] x[n] + b[m]; `bias` may be omitted.
Var affine(Var weight, Var x, std::optional<Var> bias = std::nullopt);
/// v[n]^T X[n x d] -> [d].
Var vecmat(Var v, Var x);

Var tanh(Var a);
Var sigmoid(Var a);
/// ln(max(a, floor)); the gradient is zero where the floor is active.
Var log(Var a, Real floor = 0.0);

/// Softmax over a vector with optional mask (nonzero = selectable).
/// Masked positions are exactly 0.
Var softmax(Var a, std::span<const unsigned char> mask = {});

Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
Var slice(Var a, std::size_t offset, std::size_t length);
/// Stacks equal-length vectors into rows of a matrix.
Var stack(std::span<const Var> rows);
Var row(Var matrix, std::size_t r);
/// Row `index` of an embedding table.
Var gather_row(Var table, std::size_t index);

Var dot(Var a, Var b);
Var sum(Var a);
Var pick(Var a, std::size_t index);
Var sum_scalars(std::span<const Var> scalars);
/// Shannon entropy in nats with 0 ln 0 = 0.
Var entropy(Var p);

/// out[index[i]] += x[i] over an output of `size` entries; negative
/// indices drop their input.
Var scatter_add(Var x, std::span<const int> index, std::size_t size);

/// score_i = w . tanh(keys_i + query) + bias for keys[n x h].
Var additive_scores(Var keys, Var query, Var w, Var bias);

}  // namespace ad
}  // namespace jointgen
