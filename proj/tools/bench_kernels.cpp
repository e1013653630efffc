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

// Benchmark: serial reference kernels vs the OpenMP kernels, checking that
// both produce bit-identical outputs while measuring the speedup.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hyperdef/kernels.hpp"
#include "hyperdef/matrix.hpp"
#include "hyperdef/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using hyperdef::Matrix;
using hyperdef::Rng;
namespace kernels = hyperdef::kernels;

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

struct Case {
  std::string name;
  std::function<void(Matrix&)> serial;
  std::function<void(Matrix&)> parallel;
  Matrix out_template;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial-reference vs OpenMP kernel benchmark"};
  int size = 384;
  int reps = 5;
  int threads = 0;  // 0: hardware default
  app.add_option("--size", size, "Square matrix dimension");
  app.add_option("--reps", reps, "Timed repetitions per kernel");
  app.add_option("--threads", threads, "OpenMP threads (0: hardware default)");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (threads <= 0) threads = omp_get_max_threads();
#else
  threads = 1;
#endif

  Rng rng(42);
  const Matrix a = random_matrix(size, size, rng);
  const Matrix b = random_matrix(size, size, rng);

  std::vector<Case> cases;
  cases.push_back({"gemm_nn",
                   [&](Matrix& out) { kernels::ref::gemm_nn(a, b, out); },
                   [&](Matrix& out) { kernels::gemm_nn(a, b, out); },
                   Matrix(size, size)});
  cases.push_back({"gemm_tn",
                   [&](Matrix& out) { kernels::ref::gemm_tn(a, b, out); },
                   [&](Matrix& out) { kernels::gemm_tn(a, b, out); },
                   Matrix(size, size)});
  cases.push_back({"gemm_nt",
                   [&](Matrix& out) { kernels::ref::gemm_nt(a, b, out); },
                   [&](Matrix& out) { kernels::gemm_nt(a, b, out); },
                   Matrix(size, size)});
  cases.push_back({"tanh_forward",
                   [&](Matrix& out) { kernels::ref::tanh_forward(a, out); },
                   [&](Matrix& out) { kernels::tanh_forward(a, out); },
                   Matrix(size, size)});
  cases.push_back({"softmax_rows",
                   [&](Matrix& out) { kernels::ref::softmax_rows(a, out); },
                   [&](Matrix& out) { kernels::softmax_rows(a, out); },
                   Matrix(size, size)});
  std::vector<int> argmax;
  cases.push_back({"max_pool_cols",
                   [&](Matrix& out) { kernels::ref::max_pool_cols(a, out, argmax); },
                   [&](Matrix& out) { kernels::max_pool_cols(a, out, argmax); },
                   Matrix(size, 1)});

  std::printf("size=%d reps=%d threads=%d\n", size, reps, threads);
  std::printf("%-14s %12s %12s %9s %6s\n", "kernel", "serial_ms", "parallel_ms", "speedup",
              "equal");
  bool all_equal = true;
  for (Case& c : cases) {
    Matrix serial_out = c.out_template;
    Matrix parallel_out = c.out_template;

    kernels::set_threads(1);
    const double t_serial = time_ms([&] { c.serial(serial_out); }, reps);

    kernels::set_threads(threads);
    const double t_parallel = time_ms([&] { c.parallel(parallel_out); }, reps);
    kernels::set_threads(1);

    const bool equal = serial_out == parallel_out;
    all_equal = all_equal && equal;
    std::printf("%-14s %12.3f %12.3f %8.2fx %6s\n", c.name.c_str(), t_serial, t_parallel,
                t_serial / t_parallel, equal ? "yes" : "NO");
  }
  std::printf("bitwise equal: %s\n", all_equal ? "yes" : "NO");
  return all_equal ? 0 : 1;
}
