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

// Plain serial kernels with no pragmas and no tiling. These are the ground
// truth the parallel kernels are tested and benchmarked against; keep them
// obviously correct rather than fast.

#include <algorithm>
#include <cmath>

#include "hyperdef/kernels.hpp"

namespace hyperdef::kernels::ref {

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  require_inner_match(a, b, "ref::gemm_nn");
  if (c.rows() != a.rows() || c.cols() != b.cols()) {
    throw ShapeError("ref::gemm_nn: output shape " + c.shape_str() + " does not fit " +
                     a.shape_str() + " * " + b.shape_str());
  }
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (int t = 0; t < a.cols(); ++t) acc += a(i, t) * b(t, j);
      c(i, j) = accumulate ? c(i, j) + acc : acc;
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  if (a.rows() != b.rows()) {
    throw ShapeError("ref::gemm_tn: inner dimensions disagree, " + a.shape_str() + "^T * " +
                     b.shape_str());
  }
  if (c.rows() != a.cols() || c.cols() != b.cols()) {
    throw ShapeError("ref::gemm_tn: output shape " + c.shape_str() + " does not fit " +
                     a.shape_str() + "^T * " + b.shape_str());
  }
  for (int i = 0; i < a.cols(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (int t = 0; t < a.rows(); ++t) acc += a(t, i) * b(t, j);
      c(i, j) = accumulate ? c(i, j) + acc : acc;
    }
  }
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  if (a.cols() != b.cols()) {
    throw ShapeError("ref::gemm_nt: inner dimensions disagree, " + a.shape_str() + " * " +
                     b.shape_str() + "^T");
  }
  if (c.rows() != a.rows() || c.cols() != b.rows()) {
    throw ShapeError("ref::gemm_nt: output shape " + c.shape_str() + " does not fit " +
                     a.shape_str() + " * " + b.shape_str() + "^T");
  }
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (int t = 0; t < a.cols(); ++t) acc += a(i, t) * b(j, t);
      c(i, j) = accumulate ? c(i, j) + acc : acc;
    }
  }
}

void tanh_forward(const Matrix& x, Matrix& y) {
  require_same_shape(x, y, "ref::tanh_forward");
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = std::tanh(x.data()[i]);
}

void softmax_rows(const Matrix& x, Matrix& y) {
  require_same_shape(x, y, "ref::softmax_rows");
  if (x.cols() == 0) return;
  for (int r = 0; r < x.rows(); ++r) {
    double mx = x(r, 0);
    for (int c = 1; c < x.cols(); ++c) mx = std::max(mx, x(r, c));
    double sum = 0.0;
    for (int c = 0; c < x.cols(); ++c) {
      y(r, c) = std::exp(x(r, c) - mx);
      sum += y(r, c);
    }
    const double inv = 1.0 / sum;
    for (int c = 0; c < x.cols(); ++c) y(r, c) *= inv;
  }
}

void max_pool_cols(const Matrix& x, Matrix& y, std::vector<int>& argmax) {
  if (x.cols() == 0) {
    throw ShapeError("ref::max_pool_cols: cannot pool over zero columns, input " +
                     x.shape_str());
  }
  if (y.rows() != x.rows() || y.cols() != 1) {
    throw ShapeError("ref::max_pool_cols: output shape " + y.shape_str() +
                     " does not fit input " + x.shape_str());
  }
  argmax.assign(static_cast<std::size_t>(x.rows()), 0);
  for (int r = 0; r < x.rows(); ++r) {
    double best = x(r, 0);
    int best_c = 0;
    for (int c = 1; c < x.cols(); ++c) {
      if (x(r, c) > best) {
        best = x(r, c);
        best_c = c;
      }
    }
    y(r, 0) = best;
    argmax[static_cast<std::size_t>(r)] = best_c;
  }
}

}  // namespace hyperdef::kernels::ref
