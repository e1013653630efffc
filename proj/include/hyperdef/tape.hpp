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

#pragma once

#include <cstdint>
#include <vector>

#include "hyperdef/matrix.hpp"

namespace hyperdef {

// Reverse-mode differentiation over a topologically ordered list of nodes.
// Forward values are computed eagerly as nodes are appended; backward() runs
// one reverse sweep accumulating chain-rule contributions. A tape is
// single-threaded and not shared.
class Tape {
 public:
  enum class Op : std::uint8_t {
    kLeaf,
    kMatMulNN,    // A * B
    kMatMulNT,    // A * B^T
    kMatMulTN,    // A^T * B
    kAffineCols,  // W * X + b broadcast over columns
    kTanh,
    kSoftmaxRows,
    kSoftmaxCols,
    kWindowStack4,  // [h_{i-1}; h_i; h_{i+1}; c_i] per column, zero-padded ends
    kWindowStack3,  // [h_{i-1}; h_i; h_{i+1}] per column, zero-padded ends
    kMaxPoolCols,
    kMeanCols,
    kConcatRows,
    kPickEntry,
    kLogClamp,
    kNeg,
    kAdd,
    kScale,
    kSumAll,
  };

  struct Node {
    Op op;
    std::vector<int> inputs;
    Matrix value;
    Matrix grad;  // same shape as value; allocated lazily by backward()
    bool needs_grad = false;
    std::vector<int> argmax;  // kMaxPoolCols: winning column per row
    int pick_row = 0;         // kPickEntry
    int pick_col = 0;         // kPickEntry
    double scalar = 0.0;      // kScale factor / kLogClamp floor
  };

  int leaf(Matrix value, bool needs_grad = false);
  int matmul_nn(int a, int b);
  int matmul_nt(int a, int b);
  int matmul_tn(int a, int b);
  int affine_cols(int w, int x, int b);
  int tanh_map(int x);
  int softmax_rows(int x);
  int softmax_cols(int x);
  int window_stack4(int h, int context);
  int window_stack3(int h);
  int max_pool_cols(int x);
  int mean_cols(int x);
  int concat_rows(const std::vector<int>& parts);
  int pick_entry(int x, int row, int col);
  int log_clamp(int x, double floor);
  int neg(int x);
  int add(int a, int b);
  int scale(int x, double factor);
  int sum_all(int x);

  const Matrix& value(int id) const { return node(id).value; }
  // Gradient of the most recent backward() loss w.r.t. this node; zero matrix
  // if the node is off every path to the loss.
  const Matrix& grad(int id);

  // Reverse sweep from a scalar (1x1) loss node. Clears previous gradients.
  void backward(int loss_id);

  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const;

 private:
  Node& mutable_node(int id);
  int push(Node n);
  void check_id(int id) const;

  std::vector<Node> nodes_;
};

// Eager single-shot convenience ops over plain matrices (no gradient).
Matrix affine(const Matrix& w, const Matrix& x, const Matrix& b);
Matrix tanh_map(const Matrix& m);
std::vector<double> softmax_row(const std::vector<double>& v);
Matrix max_pool_columns(const Matrix& m);

}  // namespace hyperdef
