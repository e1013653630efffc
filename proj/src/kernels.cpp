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

#include "hyperdef/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hyperdef::kernels {

namespace {

std::atomic<int> g_threads{1};

// Work sizes below this run serially: thread startup costs more than the loop.
constexpr std::size_t kParallelCutoff = 4096;

int nthreads() { return g_threads.load(std::memory_order_relaxed); }

bool parallel(std::size_t work) { return nthreads() > 1 && work >= kParallelCutoff; }

std::size_t work3(int a, int b, int c) {
  return static_cast<std::size_t>(a) * static_cast<std::size_t>(b) *
         static_cast<std::size_t>(c);
}

}  // namespace

void set_threads(int n) {
#ifdef _OPENMP
  g_threads.store(std::max(1, n), std::memory_order_relaxed);
#else
  (void)n;
  g_threads.store(1, std::memory_order_relaxed);
#endif
}

int threads() { return nthreads(); }

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  require_inner_match(a, b, "gemm_nn");
  if (c.rows() != a.rows() || c.cols() != b.cols()) {
    throw ShapeError("gemm_nn: output shape " + c.shape_str() + " does not fit " +
                     a.shape_str() + " * " + b.shape_str());
  }
  const int m = a.rows(), k = a.cols(), n = b.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) \
    if (parallel(work3(m, n, k)))
#endif
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) {
        acc += pa[static_cast<std::size_t>(i) * k + t] * pb[static_cast<std::size_t>(t) * n + j];
      }
      double* out = &pc[static_cast<std::size_t>(i) * n + j];
      *out = accumulate ? *out + acc : acc;
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  if (a.rows() != b.rows()) {
    throw ShapeError("gemm_tn: inner dimensions disagree, " + a.shape_str() + "^T * " +
                     b.shape_str());
  }
  if (c.rows() != a.cols() || c.cols() != b.cols()) {
    throw ShapeError("gemm_tn: output shape " + c.shape_str() + " does not fit " +
                     a.shape_str() + "^T * " + b.shape_str());
  }
  const int m = a.cols(), k = a.rows(), n = b.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) \
    if (parallel(work3(m, n, k)))
#endif
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) {
        acc += pa[static_cast<std::size_t>(t) * m + i] * pb[static_cast<std::size_t>(t) * n + j];
      }
      double* out = &pc[static_cast<std::size_t>(i) * n + j];
      *out = accumulate ? *out + acc : acc;
    }
  }
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  if (a.cols() != b.cols()) {
    throw ShapeError("gemm_nt: inner dimensions disagree, " + a.shape_str() + " * " +
                     b.shape_str() + "^T");
  }
  if (c.rows() != a.rows() || c.cols() != b.rows()) {
    throw ShapeError("gemm_nt: output shape " + c.shape_str() + " does not fit " +
                     a.shape_str() + " * " + b.shape_str() + "^T");
  }
  const int m = a.rows(), k = a.cols(), n = b.rows();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) \
    if (parallel(work3(m, n, k)))
#endif
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) {
        acc += pa[static_cast<std::size_t>(i) * k + t] * pb[static_cast<std::size_t>(j) * k + t];
      }
      double* out = &pc[static_cast<std::size_t>(i) * n + j];
      *out = accumulate ? *out + acc : acc;
    }
  }
}

void tanh_forward(const Matrix& x, Matrix& y) {
  require_same_shape(x, y, "tanh_forward");
  const int n = static_cast<int>(x.size());
  const double* px = x.data();
  double* py = y.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) if (parallel(x.size()))
#endif
  for (int i = 0; i < n; ++i) py[i] = std::tanh(px[i]);
}

void tanh_backward(const Matrix& y, const Matrix& dy, Matrix& dx) {
  require_same_shape(y, dy, "tanh_backward");
  require_same_shape(y, dx, "tanh_backward");
  const int n = static_cast<int>(y.size());
  const double* py = y.data();
  const double* pdy = dy.data();
  double* pdx = dx.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) if (parallel(y.size()))
#endif
  for (int i = 0; i < n; ++i) pdx[i] += pdy[i] * (1.0 - py[i] * py[i]);
}

void softmax_rows(const Matrix& x, Matrix& y) {
  require_same_shape(x, y, "softmax_rows");
  const int rows = x.rows(), cols = x.cols();
  if (cols == 0) return;
  const double* px = x.data();
  double* py = y.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) if (parallel(x.size()))
#endif
  for (int r = 0; r < rows; ++r) {
    const double* row = px + static_cast<std::size_t>(r) * cols;
    double* out = py + static_cast<std::size_t>(r) * cols;
    double mx = row[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      out[c] = std::exp(row[c] - mx);
      sum += out[c];
    }
    const double inv = 1.0 / sum;
    for (int c = 0; c < cols; ++c) out[c] *= inv;
  }
}

void softmax_rows_backward(const Matrix& y, const Matrix& dy, Matrix& dx) {
  require_same_shape(y, dy, "softmax_rows_backward");
  require_same_shape(y, dx, "softmax_rows_backward");
  const int rows = y.rows(), cols = y.cols();
  const double* py = y.data();
  const double* pdy = dy.data();
  double* pdx = dx.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) if (parallel(y.size()))
#endif
  for (int r = 0; r < rows; ++r) {
    const double* yr = py + static_cast<std::size_t>(r) * cols;
    const double* gr = pdy + static_cast<std::size_t>(r) * cols;
    double* xr = pdx + static_cast<std::size_t>(r) * cols;
    double dot = 0.0;
    for (int c = 0; c < cols; ++c) dot += gr[c] * yr[c];
    for (int c = 0; c < cols; ++c) xr[c] += yr[c] * (gr[c] - dot);
  }
}

void max_pool_cols(const Matrix& x, Matrix& y, std::vector<int>& argmax) {
  if (x.cols() == 0) {
    throw ShapeError("max_pool_cols: cannot pool over zero columns, input " + x.shape_str());
  }
  if (y.rows() != x.rows() || y.cols() != 1) {
    throw ShapeError("max_pool_cols: output shape " + y.shape_str() + " does not fit input " +
                     x.shape_str());
  }
  const int rows = x.rows(), cols = x.cols();
  argmax.assign(static_cast<std::size_t>(rows), 0);
  const double* px = x.data();
  double* py = y.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) if (parallel(x.size()))
#endif
  for (int r = 0; r < rows; ++r) {
    const double* row = px + static_cast<std::size_t>(r) * cols;
    double best = row[0];
    int best_c = 0;
    for (int c = 1; c < cols; ++c) {
      if (row[c] > best) {
        best = row[c];
        best_c = c;
      }
    }
    py[r] = best;
    argmax[static_cast<std::size_t>(r)] = best_c;
  }
}

void mean_cols(const Matrix& x, Matrix& y) {
  if (x.cols() == 0) {
    throw ShapeError("mean_cols: cannot average over zero columns, input " + x.shape_str());
  }
  if (y.rows() != x.rows() || y.cols() != 1) {
    throw ShapeError("mean_cols: output shape " + y.shape_str() + " does not fit input " +
                     x.shape_str());
  }
  const int rows = x.rows(), cols = x.cols();
  const double* px = x.data();
  double* py = y.data();
  const double inv = 1.0 / static_cast<double>(cols);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) if (parallel(x.size()))
#endif
  for (int r = 0; r < rows; ++r) {
    const double* row = px + static_cast<std::size_t>(r) * cols;
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += row[c];
    py[r] = acc * inv;
  }
}

void add_bias_cols(Matrix& y, const Matrix& bias) {
  if (bias.rows() != y.rows() || bias.cols() != 1) {
    throw ShapeError("add_bias_cols: bias shape " + bias.shape_str() + " does not fit " +
                     y.shape_str());
  }
  const int rows = y.rows(), cols = y.cols();
  const double* pb = bias.data();
  double* py = y.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) if (parallel(y.size()))
#endif
  for (int r = 0; r < rows; ++r) {
    double* row = py + static_cast<std::size_t>(r) * cols;
    const double b = pb[r];
    for (int c = 0; c < cols; ++c) row[c] += b;
  }
}

void rowsum_acc(const Matrix& dy, Matrix& bias_grad) {
  if (bias_grad.rows() != dy.rows() || bias_grad.cols() != 1) {
    throw ShapeError("rowsum_acc: accumulator shape " + bias_grad.shape_str() +
                     " does not fit " + dy.shape_str());
  }
  const int rows = dy.rows(), cols = dy.cols();
  const double* pd = dy.data();
  double* pg = bias_grad.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) if (parallel(dy.size()))
#endif
  for (int r = 0; r < rows; ++r) {
    const double* row = pd + static_cast<std::size_t>(r) * cols;
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += row[c];
    pg[r] += acc;
  }
}

void axpy(double alpha, const Matrix& x, Matrix& y) {
  require_same_shape(x, y, "axpy");
  const int n = static_cast<int>(x.size());
  const double* px = x.data();
  double* py = y.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads()) if (parallel(x.size()))
#endif
  for (int i = 0; i < n; ++i) py[i] += alpha * px[i];
}

}  // namespace hyperdef::kernels
