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

#include "hyperdef/matrix.hpp"

namespace hyperdef::kernels {

// Number of OpenMP threads the parallel kernels may use. 1 disables the
// parallel regions entirely. Every kernel produces bit-identical output for
// any thread count: work is partitioned over independent output entries and
// each entry accumulates in a fixed order.
void set_threads(int n);
int threads();

// C = A * B (plus optional accumulate into C).
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
// C = A^T * B.
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
// C = A * B^T.
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);

void tanh_forward(const Matrix& x, Matrix& y);
// dx += dy .* (1 - y^2), with y the forward output.
void tanh_backward(const Matrix& y, const Matrix& dy, Matrix& dx);

// Each row becomes a probability distribution; max-subtraction for stability.
void softmax_rows(const Matrix& x, Matrix& y);
void softmax_rows_backward(const Matrix& y, const Matrix& dy, Matrix& dx);

// Per-row maximum over columns; argmax[r] is the first maximal column.
void max_pool_cols(const Matrix& x, Matrix& y, std::vector<int>& argmax);
void mean_cols(const Matrix& x, Matrix& y);

// y += column-broadcast bias applied to every column of shape reference.
void add_bias_cols(Matrix& y, const Matrix& bias);
// bias_grad += row-sums of dy.
void rowsum_acc(const Matrix& dy, Matrix& bias_grad);

// axpy over whole buffers: y += alpha * x (shapes must match).
void axpy(double alpha, const Matrix& x, Matrix& y);

// Serial reference implementations, kept for testing and benchmarking. The
// parallel kernels above must match these bit-for-bit.
namespace ref {
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
void tanh_forward(const Matrix& x, Matrix& y);
void softmax_rows(const Matrix& x, Matrix& y);
void max_pool_cols(const Matrix& x, Matrix& y, std::vector<int>& argmax);
}  // namespace ref

}  // namespace hyperdef::kernels
