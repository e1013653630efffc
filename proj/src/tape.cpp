/*
 * Copyright 2026 The HyperDef Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hyperdef/tape.hpp"

#include <cmath>
#include <string>

#include "hyperdef/kernels.hpp"

namespace hyperdef {

namespace {

void check_finite(const Matrix& m, const char* op) {
  if (!m.all_finite()) {
    throw NumericError(std::string(op) + ": non-finite entry in " + m.shape_str() + " result");
  }
}

}  // namespace

const Tape::Node& Tape::node(int id) const {
  check_id(id);
  return nodes_[static_cast<std::size_t>(id)];
}

Tape::Node& Tape::mutable_node(int id) {
  check_id(id);
  return nodes_[static_cast<std::size_t>(id)];
}

void Tape::check_id(int id) const {
  if (id < 0 || id >= size()) {
    throw ShapeError("tape: node id " + std::to_string(id) + " out of range, tape size " +
                     std::to_string(size()));
  }
}

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return size() - 1;
}

int Tape::leaf(Matrix value, bool needs_grad) {
  check_finite(value, "leaf");
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  return push(std::move(n));
}

int Tape::matmul_nn(int a, int b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  Node n;
  n.op = Op::kMatMulNN;
  n.inputs = {a, b};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = Matrix(na.value.rows(), nb.value.cols());
  kernels::gemm_nn(na.value, nb.value, n.value);
  check_finite(n.value, "matmul_nn");
  return push(std::move(n));
}

int Tape::matmul_nt(int a, int b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  Node n;
  n.op = Op::kMatMulNT;
  n.inputs = {a, b};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = Matrix(na.value.rows(), nb.value.rows());
  kernels::gemm_nt(na.value, nb.value, n.value);
  check_finite(n.value, "matmul_nt");
  return push(std::move(n));
}

int Tape::matmul_tn(int a, int b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  Node n;
  n.op = Op::kMatMulTN;
  n.inputs = {a, b};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = Matrix(na.value.cols(), nb.value.cols());
  kernels::gemm_tn(na.value, nb.value, n.value);
  check_finite(n.value, "matmul_tn");
  return push(std::move(n));
}

int Tape::affine_cols(int w, int x, int b) {
  const Node& nw = node(w);
  const Node& nx = node(x);
  const Node& nb = node(b);
  if (nb.value.rows() != nw.value.rows() || nb.value.cols() != 1) {
    throw ShapeError("affine_cols: bias shape " + nb.value.shape_str() +
                     " does not fit weights " + nw.value.shape_str());
  }
  Node n;
  n.op = Op::kAffineCols;
  n.inputs = {w, x, b};
  n.needs_grad = nw.needs_grad || nx.needs_grad || nb.needs_grad;
  n.value = Matrix(nw.value.rows(), nx.value.cols());
  kernels::gemm_nn(nw.value, nx.value, n.value);
  kernels::add_bias_cols(n.value, nb.value);
  check_finite(n.value, "affine_cols");
  return push(std::move(n));
}

int Tape::tanh_map(int x) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kTanh;
  n.inputs = {x};
  n.needs_grad = nx.needs_grad;
  n.value = Matrix(nx.value.rows(), nx.value.cols());
  kernels::tanh_forward(nx.value, n.value);
  check_finite(n.value, "tanh_map");
  return push(std::move(n));
}

int Tape::softmax_rows(int x) {
  const Node& nx = node(x);
  if (nx.value.cols() < 1) {
    throw ShapeError("softmax_rows: need at least one column, got " + nx.value.shape_str());
  }
  Node n;
  n.op = Op::kSoftmaxRows;
  n.inputs = {x};
  n.needs_grad = nx.needs_grad;
  n.value = Matrix(nx.value.rows(), nx.value.cols());
  kernels::softmax_rows(nx.value, n.value);
  check_finite(n.value, "softmax_rows");
  return push(std::move(n));
}

int Tape::softmax_cols(int x) {
  const Node& nx = node(x);
  if (nx.value.rows() < 1) {
    throw ShapeError("softmax_cols: need at least one row, got " + nx.value.shape_str());
  }
  Node n;
  n.op = Op::kSoftmaxCols;
  n.inputs = {x};
  n.needs_grad = nx.needs_grad;
  const int rows = nx.value.rows(), cols = nx.value.cols();
  n.value = Matrix(rows, cols);
  for (int c = 0; c < cols; ++c) {
    double mx = nx.value(0, c);
    for (int r = 1; r < rows; ++r) mx = std::max(mx, nx.value(r, c));
    double sum = 0.0;
    for (int r = 0; r < rows; ++r) {
      n.value(r, c) = std::exp(nx.value(r, c) - mx);
      sum += n.value(r, c);
    }
    for (int r = 0; r < rows; ++r) n.value(r, c) /= sum;
  }
  check_finite(n.value, "softmax_cols");
  return push(std::move(n));
}

int Tape::window_stack4(int h, int context) {
  const Node& nh = node(h);
  const Node& nc = node(context);
  require_same_shape(nh.value, nc.value, "window_stack4");
  const int d = nh.value.rows(), len = nh.value.cols();
  if (len < 1) {
    throw ShapeError("window_stack4: need at least one column, got " + nh.value.shape_str());
  }
  Node n;
  n.op = Op::kWindowStack4;
  n.inputs = {h, context};
  n.needs_grad = nh.needs_grad || nc.needs_grad;
  n.value = Matrix(4 * d, len);
  for (int i = 0; i < len; ++i) {
    for (int r = 0; r < d; ++r) {
      n.value(r, i) = i > 0 ? nh.value(r, i - 1) : 0.0;
      n.value(d + r, i) = nh.value(r, i);
      n.value(2 * d + r, i) = i + 1 < len ? nh.value(r, i + 1) : 0.0;
      n.value(3 * d + r, i) = nc.value(r, i);
    }
  }
  return push(std::move(n));
}

int Tape::window_stack3(int h) {
  const Node& nh = node(h);
  const int d = nh.value.rows(), len = nh.value.cols();
  if (len < 1) {
    throw ShapeError("window_stack3: need at least one column, got " + nh.value.shape_str());
  }
  Node n;
  n.op = Op::kWindowStack3;
  n.inputs = {h};
  n.needs_grad = nh.needs_grad;
  n.value = Matrix(3 * d, len);
  for (int i = 0; i < len; ++i) {
    for (int r = 0; r < d; ++r) {
      n.value(r, i) = i > 0 ? nh.value(r, i - 1) : 0.0;
      n.value(d + r, i) = nh.value(r, i);
      n.value(2 * d + r, i) = i + 1 < len ? nh.value(r, i + 1) : 0.0;
    }
  }
  return push(std::move(n));
}

int Tape::max_pool_cols(int x) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kMaxPoolCols;
  n.inputs = {x};
  n.needs_grad = nx.needs_grad;
  n.value = Matrix(nx.value.rows(), 1);
  kernels::max_pool_cols(nx.value, n.value, n.argmax);
  return push(std::move(n));
}

int Tape::mean_cols(int x) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kMeanCols;
  n.inputs = {x};
  n.needs_grad = nx.needs_grad;
  n.value = Matrix(nx.value.rows(), 1);
  kernels::mean_cols(nx.value, n.value);
  return push(std::move(n));
}

int Tape::concat_rows(const std::vector<int>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  int total = 0;
  const int cols = node(parts[0]).value.cols();
  bool needs = false;
  for (int id : parts) {
    const Node& p = node(id);
    if (p.value.cols() != cols) {
      throw ShapeError("concat_rows: column mismatch, " + p.value.shape_str() + " vs " +
                       node(parts[0]).value.shape_str());
    }
    total += p.value.rows();
    needs = needs || p.needs_grad;
  }
  Node n;
  n.op = Op::kConcatRows;
  n.inputs = parts;
  n.needs_grad = needs;
  n.value = Matrix(total, cols);
  int at = 0;
  for (int id : parts) {
    const Node& p = node(id);
    for (int r = 0; r < p.value.rows(); ++r) {
      for (int c = 0; c < cols; ++c) n.value(at + r, c) = p.value(r, c);
    }
    at += p.value.rows();
  }
  return push(std::move(n));
}

int Tape::pick_entry(int x, int row, int col) {
  const Node& nx = node(x);
  if (row < 0 || row >= nx.value.rows() || col < 0 || col >= nx.value.cols()) {
    throw ShapeError("pick_entry: (" + std::to_string(row) + "," + std::to_string(col) +
                     ") outside " + nx.value.shape_str());
  }
  Node n;
  n.op = Op::kPickEntry;
  n.inputs = {x};
  n.needs_grad = nx.needs_grad;
  n.pick_row = row;
  n.pick_col = col;
  n.value = Matrix(1, 1);
  n.value(0, 0) = nx.value(row, col);
  return push(std::move(n));
}

int Tape::log_clamp(int x, double floor) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kLogClamp;
  n.inputs = {x};
  n.needs_grad = nx.needs_grad;
  n.scalar = floor;
  n.value = Matrix(nx.value.rows(), nx.value.cols());
  for (std::size_t i = 0; i < nx.value.size(); ++i) {
    n.value.data()[i] = std::log(std::max(nx.value.data()[i], floor));
  }
  check_finite(n.value, "log_clamp");
  return push(std::move(n));
}

int Tape::neg(int x) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kNeg;
  n.inputs = {x};
  n.needs_grad = nx.needs_grad;
  n.value = Matrix(nx.value.rows(), nx.value.cols());
  for (std::size_t i = 0; i < nx.value.size(); ++i) n.value.data()[i] = -nx.value.data()[i];
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same_shape(na.value, nb.value, "add");
  Node n;
  n.op = Op::kAdd;
  n.inputs = {a, b};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = na.value;
  kernels::axpy(1.0, nb.value, n.value);
  check_finite(n.value, "add");
  return push(std::move(n));
}

int Tape::scale(int x, double factor) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kScale;
  n.inputs = {x};
  n.needs_grad = nx.needs_grad;
  n.scalar = factor;
  n.value = Matrix(nx.value.rows(), nx.value.cols());
  for (std::size_t i = 0; i < nx.value.size(); ++i) {
    n.value.data()[i] = factor * nx.value.data()[i];
  }
  check_finite(n.value, "scale");
  return push(std::move(n));
}

int Tape::sum_all(int x) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kSumAll;
  n.inputs = {x};
  n.needs_grad = nx.needs_grad;
  n.value = Matrix(1, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < nx.value.size(); ++i) acc += nx.value.data()[i];
  n.value(0, 0) = acc;
  check_finite(n.value, "sum_all");
  return push(std::move(n));
}

const Matrix& Tape::grad(int id) {
  Node& n = mutable_node(id);
  if (!n.grad.same_shape(n.value)) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(int loss_id) {
  const Node& loss = node(loss_id);
  if (loss.value.rows() != 1 || loss.value.cols() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + loss.value.shape_str());
  }
  // Fresh zero gradients for every node; untouched ones stay exactly zero.
  for (Node& n : nodes_) {
    n.grad = Matrix(n.value.rows(), n.value.cols());
  }
  mutable_node(loss_id).grad(0, 0) = 1.0;

  for (int id = loss_id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) continue;
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatMulNN: {
        Node& a = mutable_node(n.inputs[0]);
        Node& b = mutable_node(n.inputs[1]);
        if (a.needs_grad) kernels::gemm_nt(n.grad, b.value, a.grad, /*accumulate=*/true);
        if (b.needs_grad) kernels::gemm_tn(a.value, n.grad, b.grad, /*accumulate=*/true);
        break;
      }
      case Op::kMatMulNT: {
        // C = A * B^T: dA += dC * B, dB += dC^T * A.
        Node& a = mutable_node(n.inputs[0]);
        Node& b = mutable_node(n.inputs[1]);
        if (a.needs_grad) kernels::gemm_nn(n.grad, b.value, a.grad, /*accumulate=*/true);
        if (b.needs_grad) kernels::gemm_tn(n.grad, a.value, b.grad, /*accumulate=*/true);
        break;
      }
      case Op::kMatMulTN: {
        // C = A^T * B: dA += B * dC^T, dB += A * dC.
        Node& a = mutable_node(n.inputs[0]);
        Node& b = mutable_node(n.inputs[1]);
        if (a.needs_grad) kernels::gemm_nt(b.value, n.grad, a.grad, /*accumulate=*/true);
        if (b.needs_grad) kernels::gemm_nn(a.value, n.grad, b.grad, /*accumulate=*/true);
        break;
      }
      case Op::kAffineCols: {
        Node& w = mutable_node(n.inputs[0]);
        Node& x = mutable_node(n.inputs[1]);
        Node& b = mutable_node(n.inputs[2]);
        if (w.needs_grad) kernels::gemm_nt(n.grad, x.value, w.grad, /*accumulate=*/true);
        if (x.needs_grad) kernels::gemm_tn(w.value, n.grad, x.grad, /*accumulate=*/true);
        if (b.needs_grad) kernels::rowsum_acc(n.grad, b.grad);
        break;
      }
      case Op::kTanh: {
        Node& x = mutable_node(n.inputs[0]);
        if (x.needs_grad) kernels::tanh_backward(n.value, n.grad, x.grad);
        break;
      }
      case Op::kSoftmaxRows: {
        Node& x = mutable_node(n.inputs[0]);
        if (x.needs_grad) kernels::softmax_rows_backward(n.value, n.grad, x.grad);
        break;
      }
      case Op::kSoftmaxCols: {
        Node& x = mutable_node(n.inputs[0]);
        if (!x.needs_grad) break;
        const int rows = n.value.rows(), cols = n.value.cols();
        for (int c = 0; c < cols; ++c) {
          double dot = 0.0;
          for (int r = 0; r < rows; ++r) dot += n.grad(r, c) * n.value(r, c);
          for (int r = 0; r < rows; ++r) {
            x.grad(r, c) += n.value(r, c) * (n.grad(r, c) - dot);
          }
        }
        break;
      }
      case Op::kWindowStack4: {
        Node& h = mutable_node(n.inputs[0]);
        Node& ctx = mutable_node(n.inputs[1]);
        const int d = h.value.rows(), len = h.value.cols();
        for (int i = 0; i < len; ++i) {
          for (int r = 0; r < d; ++r) {
            if (h.needs_grad) {
              if (i > 0) h.grad(r, i - 1) += n.grad(r, i);
              h.grad(r, i) += n.grad(d + r, i);
              if (i + 1 < len) h.grad(r, i + 1) += n.grad(2 * d + r, i);
            }
            if (ctx.needs_grad) ctx.grad(r, i) += n.grad(3 * d + r, i);
          }
        }
        break;
      }
      case Op::kWindowStack3: {
        Node& h = mutable_node(n.inputs[0]);
        if (!h.needs_grad) break;
        const int d = h.value.rows(), len = h.value.cols();
        for (int i = 0; i < len; ++i) {
          for (int r = 0; r < d; ++r) {
            if (i > 0) h.grad(r, i - 1) += n.grad(r, i);
            h.grad(r, i) += n.grad(d + r, i);
            if (i + 1 < len) h.grad(r, i + 1) += n.grad(2 * d + r, i);
          }
        }
        break;
      }
      case Op::kMaxPoolCols: {
        Node& x = mutable_node(n.inputs[0]);
        if (!x.needs_grad) break;
        for (int r = 0; r < n.value.rows(); ++r) {
          x.grad(r, n.argmax[static_cast<std::size_t>(r)]) += n.grad(r, 0);
        }
        break;
      }
      case Op::kMeanCols: {
        Node& x = mutable_node(n.inputs[0]);
        if (!x.needs_grad) break;
        const double inv = 1.0 / static_cast<double>(x.value.cols());
        for (int r = 0; r < x.value.rows(); ++r) {
          const double g = n.grad(r, 0) * inv;
          for (int c = 0; c < x.value.cols(); ++c) x.grad(r, c) += g;
        }
        break;
      }
      case Op::kConcatRows: {
        int at = 0;
        for (int pid : n.inputs) {
          Node& p = mutable_node(pid);
          if (p.needs_grad) {
            for (int r = 0; r < p.value.rows(); ++r) {
              for (int c = 0; c < p.value.cols(); ++c) p.grad(r, c) += n.grad(at + r, c);
            }
          }
          at += p.value.rows();
        }
        break;
      }
      case Op::kPickEntry: {
        Node& x = mutable_node(n.inputs[0]);
        if (x.needs_grad) x.grad(n.pick_row, n.pick_col) += n.grad(0, 0);
        break;
      }
      case Op::kLogClamp: {
        Node& x = mutable_node(n.inputs[0]);
        if (!x.needs_grad) break;
        for (std::size_t i = 0; i < x.value.size(); ++i) {
          const double v = x.value.data()[i];
          if (v > n.scalar) x.grad.data()[i] += n.grad.data()[i] / v;
        }
        break;
      }
      case Op::kNeg: {
        Node& x = mutable_node(n.inputs[0]);
        if (x.needs_grad) kernels::axpy(-1.0, n.grad, x.grad);
        break;
      }
      case Op::kAdd: {
        Node& a = mutable_node(n.inputs[0]);
        Node& b = mutable_node(n.inputs[1]);
        if (a.needs_grad) kernels::axpy(1.0, n.grad, a.grad);
        if (b.needs_grad) kernels::axpy(1.0, n.grad, b.grad);
        break;
      }
      case Op::kScale: {
        Node& x = mutable_node(n.inputs[0]);
        if (x.needs_grad) kernels::axpy(n.scalar, n.grad, x.grad);
        break;
      }
      case Op::kSumAll: {
        Node& x = mutable_node(n.inputs[0]);
        if (!x.needs_grad) break;
        const double g = n.grad(0, 0);
        for (std::size_t i = 0; i < x.value.size(); ++i) x.grad.data()[i] += g;
        break;
      }
    }
  }
}

Matrix affine(const Matrix& w, const Matrix& x, const Matrix& b) {
  if (x.cols() != 1) {
    throw ShapeError("affine: expected a column vector, got " + x.shape_str());
  }
  if (b.rows() != w.rows() || b.cols() != 1) {
    throw ShapeError("affine: bias shape " + b.shape_str() + " does not fit weights " +
                     w.shape_str());
  }
  require_inner_match(w, x, "affine");
  Matrix y(w.rows(), 1);
  kernels::gemm_nn(w, x, y);
  kernels::add_bias_cols(y, b);
  require_finite(y, "affine");
  return y;
}

Matrix tanh_map(const Matrix& m) {
  Matrix y(m.rows(), m.cols());
  kernels::tanh_forward(m, y);
  return y;
}

std::vector<double> softmax_row(const std::vector<double>& v) {
  if (v.empty()) throw ShapeError("softmax_row: empty input");
  Matrix x(1, static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(0, static_cast<int>(i)) = v[i];
  Matrix y(1, x.cols());
  kernels::softmax_rows(x, y);
  return y.values();
}

Matrix max_pool_columns(const Matrix& m) {
  Matrix y(m.rows(), 1);
  std::vector<int> argmax;
  kernels::max_pool_cols(m, y, argmax);
  return y;
}

}  // namespace hyperdef
