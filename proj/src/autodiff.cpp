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

#include "vidsgg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace vidsgg {
namespace ad {
namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require(bool cond, const char* op, const std::string& detail) {
  if (!cond) throw std::invalid_argument(std::string(op) + ": " + detail);
}

Tape& tape_of(const Var& a) {
  require(a.valid(), "ad", "use of an unbound Var");
  return *a.tape();
}

}  // namespace

// ---- ParamStore ----------------------------------------------------------

Parameter& ParamStore::add(std::string name, Matrix init, bool trainable) {
  if (index_.count(name) != 0) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Matrix::Zero(init.rows(), init.cols());
  p->value = std::move(init);
  p->trainable = trainable;
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParamStore::find(std::string_view name) {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : params_[it->second].get();
}

const Parameter* ParamStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : params_[it->second].get();
}

Parameter& ParamStore::at(std::string_view name) {
  Parameter* p = find(name);
  if (p == nullptr) {
    throw std::out_of_range("unknown parameter: " + std::string(name));
  }
  return *p;
}

std::vector<Parameter*> ParamStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Parameter*> ParamStore::trainable() {
  std::vector<Parameter*> out;
  for (auto& p : params_) {
    if (p->trainable) out.push_back(p.get());
  }
  return out;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

// ---- Var / Tape ------------------------------------------------------------

const Matrix& Var::value() const { return tape_of(*this).value(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  require(v.size() == 1, "scalar", "expected 1x1, got " + shape_str(v));
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.own = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::scalar(double value) {
  Matrix m(1, 1);
  m(0, 0) = value;
  return constant(std::move(m));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.external = &p.value;
  if (p.trainable) {
    n.needs_grad = true;
    n.sink = &p.grad;
    n.param = &p;
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Matrix value, const std::vector<Var>& inputs, Backward back) {
  Node n;
  n.own = std::move(value);
  for (const Var& v : inputs) {
    require(v.tape() == this, "record", "input from a different tape");
    if (nodes_[v.id()].needs_grad) n.needs_grad = true;
  }
  if (n.needs_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Matrix& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.external != nullptr ? *n.external : n.own;
}

Matrix& Tape::grad(int id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    const Matrix& v = value(id);
    n.grad = Matrix::Zero(v.rows(), v.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(const Var& loss) {
  require(loss.tape() == this, "backward", "loss from a different tape");
  require(!consumed_, "backward", "tape already consumed");
  require(value(loss.id()).size() == 1, "backward",
          "loss must be 1x1, got " + shape_str(value(loss.id())));
  consumed_ = true;
  if (!nodes_[loss.id()].needs_grad) return;
  grad(loss.id())(0, 0) = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.needs_grad) continue;
    if (n.back) n.back(*this, id);
    if (n.sink != nullptr && accumulate_) *n.sink += n.grad;
  }
}

std::vector<std::pair<Parameter*, Matrix>> Tape::param_grads() const {
  std::vector<std::pair<Parameter*, Matrix>> out;
  std::unordered_map<Parameter*, std::size_t> index;
  for (const Node& n : nodes_) {
    if (n.param == nullptr || !n.has_grad) continue;
    auto [it, fresh] = index.emplace(n.param, out.size());
    if (fresh) {
      out.emplace_back(n.param, n.grad);
    } else {
      out[it->second].second += n.grad;
    }
  }
  return out;
}

// ---- Ops -----------------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  require(av.cols() == bv.rows(), "matmul",
          shape_str(av) + " * " + shape_str(bv));
  Matrix out = av * bv;
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia).noalias() += g * t.value(ib).transpose();
    if (t.needs_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * g;
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  require(av.cols() == bv.cols(), "matmul_nt",
          shape_str(av) + " * (" + shape_str(bv) + ")^T");
  Matrix out = av * bv.transpose();
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia).noalias() += g * t.value(ib);
    if (t.needs_grad(ib)) t.grad(ib).noalias() += g.transpose() * t.value(ia);
  });
}

Var left_mul_const(const Matrix& m, const Var& a) {
  const Matrix& av = a.value();
  require(m.cols() == av.rows(), "left_mul_const",
          shape_str(m) + " * " + shape_str(av));
  Matrix out = m * av;
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia, m](Tape& t, int self) {
    t.grad(ia).noalias() += m.transpose() * t.grad(self);
  });
}

Var add(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add",
          shape_str(a.value()) + " + " + shape_str(b.value()));
  Matrix out = a.value() + b.value();
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g;
    if (t.needs_grad(ib)) t.grad(ib) += g;
  });
}

Var sub(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub",
          shape_str(a.value()) + " - " + shape_str(b.value()));
  Matrix out = a.value() - b.value();
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g;
    if (t.needs_grad(ib)) t.grad(ib) -= g;
  });
}

Var mul(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "mul",
          shape_str(a.value()) + " .* " + shape_str(b.value()));
  Matrix out = a.value().cwiseProduct(b.value());
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g.cwiseProduct(t.value(ib));
    if (t.needs_grad(ib)) t.grad(ib) += g.cwiseProduct(t.value(ia));
  });
}

Var scale(const Var& a, double s) {
  Matrix out = a.value() * s;
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia, s](Tape& t, int self) {
    t.grad(ia) += t.grad(self) * s;
  });
}

Var add_scalar(const Var& a, double s) {
  Matrix out = a.value().array() + s;
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia](Tape& t, int self) {
    t.grad(ia) += t.grad(self);
  });
}

Var add_row(const Var& a, const Var& row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row",
          shape_str(a.value()) + " + row " + shape_str(row.value()));
  Matrix out = a.value().rowwise() + row.value().row(0);
  const int ia = a.id(), ir = row.id();
  return tape_of(a).record(std::move(out), {a, row}, [ia, ir](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g;
    if (t.needs_grad(ir)) t.grad(ir) += g.colwise().sum();
  });
}

Var broadcast_rows(const Var& row, Eigen::Index n) {
  require(row.rows() == 1, "broadcast_rows",
          "expected a row, got " + shape_str(row.value()));
  Matrix out = row.value().replicate(n, 1);
  const int ir = row.id();
  return tape_of(row).record(std::move(out), {row}, [ir](Tape& t, int self) {
    t.grad(ir) += t.grad(self).colwise().sum();
  });
}

Var mul_const(const Var& a, const Matrix& c) {
  require(a.rows() == c.rows() && a.cols() == c.cols(), "mul_const",
          shape_str(a.value()) + " .* " + shape_str(c));
  Matrix out = a.value().cwiseProduct(c);
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia, c](Tape& t, int self) {
    t.grad(ia) += t.grad(self).cwiseProduct(c);
  });
}

Var relu(const Var& a) {
  Matrix out = a.value().cwiseMax(0.0);
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia](Tape& t, int self) {
    const Matrix& x = t.value(ia);
    t.grad(ia) += (x.array() > 0.0).select(t.grad(self), 0.0);
  });
}

Var sigmoid(const Var& a) {
  Matrix out = a.value().unaryExpr([](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    t.grad(ia).array() +=
        t.grad(self).array() * y.array() * (1.0 - y.array());
  });
}

Var log_clamped(const Var& a, double floor) {
  Matrix out = a.value().cwiseMax(floor).array().log();
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia, floor](Tape& t, int self) {
    const Matrix& x = t.value(ia);
    const Matrix& g = t.grad(self);
    Matrix& gx = t.grad(ia);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x.data()[i] > floor) gx.data()[i] += g.data()[i] / x.data()[i];
    }
  });
}

Var softmax_rows(const Var& a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mx = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - mx).exp();
    out.row(r) /= out.row(r).sum();
  }
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    Matrix gy = g.cwiseProduct(y);
    Eigen::VectorXd dots = gy.rowwise().sum();
    Matrix& gx = t.grad(ia);
    gx += gy;
    gx.array() -= y.array().colwise() * dots.array();
  });
}

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias,
                    double eps) {
  const Matrix& xv = x.value();
  const Eigen::Index d = xv.cols();
  require(gain.rows() == 1 && gain.cols() == d && bias.rows() == 1 &&
              bias.cols() == d,
          "layer_norm_rows", "gain/bias must be 1x" + std::to_string(d));
  Matrix xhat(xv.rows(), d);
  Eigen::VectorXd inv_std(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const double mu = xv.row(r).mean();
    const double var = (xv.row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (xv.row(r).array() - mu) * inv_std(r);
  }
  Matrix out = (xhat.array().rowwise() * gain.value().row(0).array())
                   .rowwise() +
               bias.value().row(0).array();
  const int ix = x.id(), ig = gain.id(), ib = bias.id();
  return tape_of(x).record(
      std::move(out), {x, gain, bias},
      [ix, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          Tape& t, int self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(ig)) t.grad(ig) += g.cwiseProduct(xhat).colwise().sum();
        if (t.needs_grad(ib)) t.grad(ib) += g.colwise().sum();
        if (!t.needs_grad(ix)) return;
        Matrix gxhat = g.array().rowwise() * t.value(ig).row(0).array();
        Matrix& gx = t.grad(ix);
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          const double m1 = gxhat.row(r).mean();
          const double m2 = gxhat.row(r).cwiseProduct(xhat.row(r)).mean();
          gx.row(r).array() += inv_std(r) * (gxhat.row(r).array() - m1 -
                                             xhat.row(r).array() * m2);
        }
      });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    require(p.rows() == rows, "concat_cols", "row count mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(off);
    off += p.cols();
  }
  return tape_of(parts.front())
      .record(std::move(out), parts, [ids, offsets](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (!t.needs_grad(ids[k])) continue;
          Matrix& gp = t.grad(ids[k]);
          gp += g.middleCols(offsets[k], gp.cols());
        }
      });
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows", "no inputs");
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    require(p.cols() == cols, "concat_rows", "column count mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleRows(off, p.rows()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(off);
    off += p.rows();
  }
  return tape_of(parts.front())
      .record(std::move(out), parts, [ids, offsets](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (!t.needs_grad(ids[k])) continue;
          Matrix& gp = t.grad(ids[k]);
          gp += g.middleRows(offsets[k], gp.rows());
        }
      });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols",
          "range out of bounds for " + shape_str(a.value()));
  Matrix out = a.value().middleCols(start, count);
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a},
                           [ia, start, count](Tape& t, int self) {
                             t.grad(ia).middleCols(start, count) += t.grad(self);
                           });
}

Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.rows(), "slice_rows",
          "range out of bounds for " + shape_str(a.value()));
  Matrix out = a.value().middleRows(start, count);
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a},
                           [ia, start, count](Tape& t, int self) {
                             t.grad(ia).middleRows(start, count) += t.grad(self);
                           });
}

Var gather_rows(const Var& a, const std::vector<int>& rows) {
  const Matrix& av = a.value();
  Matrix out(static_cast<Eigen::Index>(rows.size()), av.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(rows[k] >= 0 && rows[k] < av.rows(), "gather_rows",
            "row index " + std::to_string(rows[k]) + " out of range");
    out.row(static_cast<Eigen::Index>(k)) = av.row(rows[k]);
  }
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia, rows](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      ga.row(rows[k]) += g.row(static_cast<Eigen::Index>(k));
    }
  });
}

Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols) {
  const Matrix& av = a.value();
  require(rows * cols == av.size(), "reshape",
          shape_str(av) + " -> " + std::to_string(rows) + "x" +
              std::to_string(cols));
  Matrix out = Eigen::Map<const Matrix>(av.data(), rows, cols);
  const Eigen::Index r0 = av.rows(), c0 = av.cols();
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia, r0, c0](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.grad(ia) += Eigen::Map<const Matrix>(g.data(), r0, c0);
  });
}

Var im2col(const Var& a, int kernel, int dilation, bool replicate) {
  require(kernel >= 1 && dilation >= 1, "im2col", "kernel/dilation must be >= 1");
  const Matrix& x = a.value();
  const Eigen::Index T = x.rows(), C = x.cols();
  const int half = kernel / 2;
  Matrix out = Matrix::Zero(T, kernel * C);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int j = 0; j < kernel; ++j) {
      Eigen::Index src = t + static_cast<Eigen::Index>(j - half) * dilation;
      if (replicate) src = std::clamp<Eigen::Index>(src, 0, T - 1);
      if (src < 0 || src >= T) continue;
      out.block(t, j * C, 1, C) = x.row(src);
    }
  }
  const int ia = a.id();
  return tape_of(a).record(
      std::move(out), {a}, [ia, kernel, dilation, half, replicate](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        Matrix& gx = t.grad(ia);
        const Eigen::Index T = gx.rows(), C = gx.cols();
        for (Eigen::Index r = 0; r < T; ++r) {
          for (int j = 0; j < kernel; ++j) {
            Eigen::Index src =
                r + static_cast<Eigen::Index>(j - half) * dilation;
            if (replicate) src = std::clamp<Eigen::Index>(src, 0, T - 1);
            if (src < 0 || src >= T) continue;
            gx.row(src) += g.block(r, j * C, 1, C);
          }
        }
      });
}

Var sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia](Tape& t, int self) {
    t.grad(ia).array() += t.grad(self)(0, 0);
  });
}

Var mean(const Var& a) {
  require(a.value().size() > 0, "mean", "empty input");
  Matrix out(1, 1);
  const double n = static_cast<double>(a.value().size());
  out(0, 0) = a.value().sum() / n;
  const int ia = a.id();
  return tape_of(a).record(std::move(out), {a}, [ia, n](Tape& t, int self) {
    t.grad(ia).array() += t.grad(self)(0, 0) / n;
  });
}

Var weighted_bce(const Var& p, const Matrix& target, const Matrix& weights,
                 double floor) {
  const Matrix& pv = p.value();
  require(pv.rows() == target.rows() && pv.cols() == target.cols() &&
              pv.rows() == weights.rows() && pv.cols() == weights.cols(),
          "weighted_bce",
          shape_str(pv) + " vs target " + shape_str(target) + " / weights " +
              shape_str(weights));
  double total = 0.0;
  for (Eigen::Index i = 0; i < pv.size(); ++i) {
    const double w = weights.data()[i];
    if (w == 0.0) continue;
    const double x = pv.data()[i];
    const double y = target.data()[i];
    total -= w * (y * std::log(std::max(x, floor)) +
                  (1.0 - y) * std::log(std::max(1.0 - x, floor)));
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  const int ip = p.id();
  return tape_of(p).record(
      std::move(out), {p}, [ip, target, weights, floor](Tape& t, int self) {
        const double g = t.grad(self)(0, 0);
        const Matrix& x = t.value(ip);
        Matrix& gx = t.grad(ip);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          const double w = weights.data()[i];
          if (w == 0.0) continue;
          const double xi = x.data()[i];
          const double yi = target.data()[i];
          double d = 0.0;
          if (xi > floor) d -= yi / xi;
          if (1.0 - xi > floor) d += (1.0 - yi) / (1.0 - xi);
          gx.data()[i] += g * w * d;
        }
      });
}

Var bce(const Var& p, const Matrix& target, double floor) {
  require(p.value().size() > 0, "bce", "empty input");
  const double w = 1.0 / static_cast<double>(p.value().size());
  return weighted_bce(p, target, Matrix::Constant(p.rows(), p.cols(), w), floor);
}

Var weighted_l1(const Var& a, const Matrix& target, const Matrix& weights) {
  const Matrix& av = a.value();
  require(av.rows() == target.rows() && av.cols() == target.cols() &&
              av.rows() == weights.rows() && av.cols() == weights.cols(),
          "weighted_l1",
          shape_str(av) + " vs target " + shape_str(target) + " / weights " +
              shape_str(weights));
  Matrix out(1, 1);
  out(0, 0) = (av - target).cwiseAbs().cwiseProduct(weights).sum();
  const int ia = a.id();
  return tape_of(a).record(
      std::move(out), {a}, [ia, target, weights](Tape& t, int self) {
        const double g = t.grad(self)(0, 0);
        const Matrix& x = t.value(ia);
        Matrix& gx = t.grad(ia);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          const double d = x.data()[i] - target.data()[i];
          if (d > 0) gx.data()[i] += g * weights.data()[i];
          else if (d < 0) gx.data()[i] -= g * weights.data()[i];
        }
      });
}

Var l1(const Var& a, const Matrix& target) {
  require(a.value().size() > 0, "l1", "empty input");
  const double w = 1.0 / static_cast<double>(a.value().size());
  return weighted_l1(a, target, Matrix::Constant(a.rows(), a.cols(), w));
}

}  // namespace ad
}  // namespace vidsgg
