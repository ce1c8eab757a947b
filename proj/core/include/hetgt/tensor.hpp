// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <type_traits>
#include <utility>
#include <vector>

#include "hetgt/errors.hpp"

namespace hetgt {

template <class S>
struct TensorData {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<S> value;
  std::vector<S> grad;  // empty until backward touches this tensor
  bool requires_grad = false;
};

/// Dense row-major 2-D tensor of float or double. A Tensor is a handle:
/// copies share storage, so tapes and closures can alias it cheaply. Ops
/// that produce new values allocate fresh tensors. Gradient state lives in
/// the shared block and may be mutated through const handles, mirroring
/// shared_ptr semantics.
template <class S>
class Tensor {
  static_assert(std::is_floating_point_v<S>, "Tensor scalar must be float/double");

 public:
  Tensor() = default;

  Tensor(std::size_t rows, std::size_t cols, bool requires_grad = false)
      : d_(std::make_shared<TensorData<S>>()) {
    d_->rows = rows;
    d_->cols = cols;
    d_->value.assign(rows * cols, S(0));
    d_->requires_grad = requires_grad;
  }

  static Tensor zeros(std::size_t rows, std::size_t cols,
                      bool requires_grad = false) {
    return Tensor(rows, cols, requires_grad);
  }

  static Tensor from(std::size_t rows, std::size_t cols, std::vector<S> v,
                     bool requires_grad = false) {
    if (v.size() != rows * cols) {
      throw DimensionError("Tensor::from: value count does not match shape");
    }
    Tensor t(rows, cols, requires_grad);
    t.d_->value = std::move(v);
    return t;
  }

  static Tensor row(std::initializer_list<S> v, bool requires_grad = false) {
    return from(1, v.size(), std::vector<S>(v), requires_grad);
  }

  static Tensor column(std::initializer_list<S> v, bool requires_grad = false) {
    return from(v.size(), 1, std::vector<S>(v), requires_grad);
  }

  bool defined() const { return static_cast<bool>(d_); }
  std::size_t rows() const { return d_->rows; }
  std::size_t cols() const { return d_->cols; }
  std::size_t size() const { return d_->value.size(); }

  S* data() const { return d_->value.data(); }
  const std::vector<S>& values() const { return d_->value; }
  std::vector<S>& values() { return d_->value; }

  S at(std::size_t i, std::size_t j) const {
    return d_->value[i * d_->cols + j];
  }
  S& at(std::size_t i, std::size_t j) { return d_->value[i * d_->cols + j]; }

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool rg) { d_->requires_grad = rg; }

  bool has_grad() const { return !d_->grad.empty(); }

  /// Allocates (zero-filled) gradient storage on first use.
  std::vector<S>& grad() const {
    if (d_->grad.empty()) d_->grad.assign(d_->value.size(), S(0));
    return d_->grad;
  }
  S* grad_data() const { return grad().data(); }

  void zero_grad() const {
    if (!d_->grad.empty()) d_->grad.assign(d_->value.size(), S(0));
  }
  void clear_grad() const { d_->grad.clear(); }

  /// Stable identity of the storage block, for introspection and FD probes.
  const void* id() const { return d_.get(); }

  /// Deep copy of the values; gradient state is not copied.
  Tensor clone() const {
    Tensor t(rows(), cols(), requires_grad());
    t.d_->value = d_->value;
    return t;
  }

  bool all_finite() const {
    for (const S v : d_->value) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  std::shared_ptr<TensorData<S>> d_;
};

}  // namespace hetgt
