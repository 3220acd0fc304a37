/* Copyright 2026 The vidsgg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Minimal reverse-mode differentiation over dense row-major matrices.
//
// A Tape records every operation of one forward pass. Parameters live in a
// ParamStore outside the tape; Tape::backward accumulates their gradients
// into Parameter::grad. Every value is a 2-D matrix; scalars are 1x1.

#ifndef VIDSGG_AUTODIFF_HPP_
#define VIDSGG_AUTODIFF_HPP_

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace vidsgg {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

namespace ad {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  // Frozen parameters (e.g. fixed category embeddings) are persisted with the
  // model but never receive gradients.
  bool trainable = true;
};

class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  // Throws std::invalid_argument on a duplicate name.
  Parameter& add(std::string name, Matrix init, bool trainable = true);

  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;
  Parameter& at(std::string_view name);

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::vector<Parameter*> trainable();

  void zero_grad();
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var scalar(double value);
  // Leaf bound to a parameter; reads its value in place.
  Var param(Parameter& p);

  // Seeds d(loss)/d(loss) = 1 and propagates to every parameter leaf.
  // `loss` must be 1x1. A tape supports a single backward pass.
  void backward(const Var& loss);

  // When disabled, backward leaves parameter gradients on the tape instead of
  // adding them to Parameter::grad; read them with param_grads(). Lets
  // several tapes run concurrently against one ParamStore.
  void set_accumulate_into_params(bool on) { accumulate_ = on; }
  // Gradient per parameter bound on this tape (summed over repeated binds).
  std::vector<std::pair<Parameter*, Matrix>> param_grads() const;

  // Op-implementer interface.
  Var record(Matrix value, const std::vector<Var>& inputs, Backward back);
  const Matrix& value(int id) const;
  Matrix& grad(int id);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix own;
    const Matrix* external = nullptr;
    Matrix grad;
    Matrix* sink = nullptr;
    Parameter* param = nullptr;
    bool needs_grad = false;
    bool has_grad = false;
    Backward back;
  };
  std::deque<Node> nodes_;
  bool consumed_ = false;
  bool accumulate_ = true;
};

// ---- Operations --------------------------------------------------------
// Shapes are checked; mismatches throw std::invalid_argument.

Var matmul(const Var& a, const Var& b);     // a * b
Var matmul_nt(const Var& a, const Var& b);  // a * b^T
Var left_mul_const(const Matrix& m, const Var& a);  // m * a

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var add_row(const Var& a, const Var& row);  // row broadcast over a's rows
Var broadcast_rows(const Var& row, Eigen::Index n);
Var mul_const(const Var& a, const Matrix& c);  // elementwise by constant

Var relu(const Var& a);
Var sigmoid(const Var& a);
Var log_clamped(const Var& a, double floor);

Var softmax_rows(const Var& a);
Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias,
                    double eps = 1e-5);

Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count);
Var gather_rows(const Var& a, const std::vector<int>& rows);
Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols);

// Sliding-window unfold along the row (time) axis with "same" padding:
// output row t = [x[t + (j - k/2) * dilation] for j in 0..k-1], giving a
// T x (kernel * C) matrix. Out-of-range rows read zero, or the nearest edge
// row when `replicate` is set.
Var im2col(const Var& a, int kernel, int dilation, bool replicate = false);

Var sum(const Var& a);
Var mean(const Var& a);

// Mean binary cross-entropy between probabilities `p` and a constant target
// in [0,1]; log arguments are clamped at `floor`.
Var bce(const Var& p, const Matrix& target, double floor = 1e-12);
// Mean absolute error against a constant target.
Var l1(const Var& a, const Matrix& target);
// Sum of weights[i] * BCE_i and of weights[i] * |a_i - target_i|.
Var weighted_bce(const Var& p, const Matrix& target, const Matrix& weights,
                 double floor = 1e-12);
Var weighted_l1(const Var& a, const Matrix& target, const Matrix& weights);

}  // namespace ad
}  // namespace vidsgg

#endif  // VIDSGG_AUTODIFF_HPP_
