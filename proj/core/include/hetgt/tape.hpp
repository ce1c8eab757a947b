// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "hetgt/errors.hpp"
#include "hetgt/tensor.hpp"

namespace hetgt {

/// Reverse-mode tape. Ops append nodes in execution order, which is by
/// construction a topological order of the compute graph; backward() walks
/// the list once in reverse, pulling output gradients into input gradients.
///
/// Gradients accumulate additively: a tensor consumed by several ops
/// receives the sum of every path's contribution. Intermediate (node output)
/// gradients are reset at the start of backward(); leaf gradients (model
/// parameters) are owned by the caller, who zeroes them between steps, so a
/// re-run of backward() after re-zeroing leaves is bit-identical.
template <class S>
class Tape {
 public:
  struct Node {
    std::string op;
    std::vector<const void*> inputs;  // storage ids, for introspection
    Tensor<S> output;
    std::function<void()> pull;  // adds d(loss)/d(input) given output grad
  };

  bool recording() const { return recording_; }
  void set_recording(bool r) { recording_ = r; }

  /// When enabled, every recorded op's output is scanned for NaN/Inf and a
  /// NumericError naming the op is thrown on the first hit.
  void set_check_finite(bool c) { check_finite_ = c; }
  bool check_finite() const { return check_finite_; }

  /// Registers `out = op(inputs...)`. Sets out.requires_grad and appends a
  /// node only when recording and at least one input requires a gradient.
  void record(std::string op,
              std::initializer_list<const Tensor<S>*> inputs,
              const Tensor<S>& out, std::function<void()> pull) {
    std::vector<const Tensor<S>*> v(inputs);
    record(std::move(op), v, out, std::move(pull));
  }

  void record(std::string op, const std::vector<const Tensor<S>*>& inputs,
              const Tensor<S>& out, std::function<void()> pull) {
    if (check_finite_ && !out.all_finite()) {
      throw NumericError("non-finite values produced by op '" + op + "'");
    }
    bool any = false;
    for (const auto* t : inputs) {
      if (t->requires_grad()) {
        any = true;
        break;
      }
    }
    Tensor<S> mutable_out = out;
    mutable_out.set_requires_grad(any && recording_);
    if (!mutable_out.requires_grad()) return;

    Node n;
    n.op = std::move(op);
    n.inputs.reserve(inputs.size());
    for (const auto* t : inputs) n.inputs.push_back(t->id());
    n.output = out;
    n.pull = std::move(pull);
    nodes_.push_back(std::move(n));
  }

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. `loss` must
  /// be a 1x1 tensor that was produced on this tape.
  void backward(const Tensor<S>& loss) {
    if (loss.size() != 1) {
      throw ContractError("Tape::backward: loss must be a 1x1 tensor");
    }
    if (!loss.requires_grad()) {
      throw ContractError(
          "Tape::backward: loss does not depend on any tracked parameter");
    }
    for (auto& n : nodes_) n.output.clear_grad();
    loss.grad()[0] = S(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      if (!it->output.has_grad()) continue;  // no path to the loss
      it->pull();
    }
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  std::vector<Node> nodes_;
  bool recording_ = true;
  bool check_finite_ = false;
};

}  // namespace hetgt
