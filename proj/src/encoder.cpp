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

#include "hyperdef/encoder.hpp"

#include <cmath>
#include <string>

#include "hyperdef/kernels.hpp"

namespace hyperdef {

namespace {

void check_encoder_width(const EncoderParams& params, int d, int windows, const char* op) {
  if (params.W.rows() != d || params.W.cols() != windows * d) {
    throw ShapeError(std::string(op) + ": weights " + params.W.shape_str() + " do not fit " +
                     std::to_string(d) + "x" + std::to_string(windows * d) +
                     " for state dimension " + std::to_string(d));
  }
  if (params.b.rows() != d || params.b.cols() != 1) {
    throw ShapeError(std::string(op) + ": bias " + params.b.shape_str() + " does not fit " +
                     std::to_string(d) + "x1");
  }
}

}  // namespace

FeatureMap embed_sequence(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                          int cap) {
  if (tokens.empty()) throw ShapeError("embed_sequence: empty token sequence");
  int n = static_cast<int>(tokens.size());
  if (cap > 0 && n > cap) n = cap;
  Matrix states(table.dim(), n);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> v = table.lookup(tokens[static_cast<std::size_t>(i)]);
    for (int r = 0; r < table.dim(); ++r) states(r, i) = v[static_cast<std::size_t>(r)];
  }
  return FeatureMap{std::move(states)};
}

AttentionWeights match_scores(const FeatureMap& a, const FeatureMap& b) {
  if (a.dim() != b.dim()) {
    throw ShapeError("match_scores: state dimensions disagree, " + a.states.shape_str() +
                     " vs " + b.states.shape_str());
  }
  AttentionWeights out;
  out.scores = Matrix(a.length(), b.length());
  kernels::gemm_tn(a.states, b.states, out.scores);
  out.weights = Matrix(out.scores.rows(), out.scores.cols());
  kernels::softmax_rows(out.scores, out.weights);
  return out;
}

Matrix align(const FeatureMap& b, const std::vector<double>& weights_row) {
  if (static_cast<int>(weights_row.size()) != b.length()) {
    throw ShapeError("align: " + std::to_string(weights_row.size()) + " weights for " +
                     std::to_string(b.length()) + " states");
  }
  double sum = 0.0;
  for (double w : weights_row) sum += w;
  if (std::abs(sum - 1.0) > 1e-6) {
    throw NumericError("align: weights sum to " + std::to_string(sum) +
                       ", expected 1 within 1e-6");
  }
  Matrix out(b.dim(), 1);
  for (int j = 0; j < b.length(); ++j) {
    const double w = weights_row[static_cast<std::size_t>(j)];
    for (int r = 0; r < b.dim(); ++r) out(r, 0) += w * b.states(r, j);
  }
  return out;
}

Matrix aligned_states(const FeatureMap& b, const AttentionWeights& attention) {
  if (attention.weights.cols() != b.length()) {
    throw ShapeError("aligned_states: weights " + attention.weights.shape_str() +
                     " do not fit states " + b.states.shape_str());
  }
  Matrix out(b.dim(), attention.weights.rows());
  kernels::gemm_nt(b.states, attention.weights, out);
  return out;
}

Matrix attentive_convolve(const FeatureMap& a, const Matrix& aligned,
                          const EncoderParams& params) {
  const int d = a.dim(), n = a.length();
  if (aligned.rows() != d || aligned.cols() != n) {
    throw ShapeError("attentive_convolve: aligned states " + aligned.shape_str() +
                     " do not fit feature map " + a.states.shape_str());
  }
  check_encoder_width(params, d, 4, "attentive_convolve");
  Matrix stacked(4 * d, n);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < d; ++r) {
      stacked(r, i) = i > 0 ? a.states(r, i - 1) : 0.0;
      stacked(d + r, i) = a.states(r, i);
      stacked(2 * d + r, i) = i + 1 < n ? a.states(r, i + 1) : 0.0;
      stacked(3 * d + r, i) = aligned(r, i);
    }
  }
  Matrix pre(d, n);
  kernels::gemm_nn(params.W, stacked, pre);
  kernels::add_bias_cols(pre, params.b);
  Matrix out(d, n);
  kernels::tanh_forward(pre, out);
  return out;
}

Matrix encode_pair(const FeatureMap& s1, const FeatureMap& s2, const EncoderParams& params) {
  const AttentionWeights attention = match_scores(s1, s2);
  const Matrix aligned = aligned_states(s2, attention);
  const Matrix convolved = attentive_convolve(s1, aligned, params);
  return max_pool_columns(convolved);
}

Matrix encode_cnn(const FeatureMap& s, const EncoderParams& params) {
  const int d = s.dim(), n = s.length();
  if (n < 1) throw ShapeError("encode_cnn: empty feature map");
  check_encoder_width(params, d, 3, "encode_cnn");
  Matrix stacked(3 * d, n);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < d; ++r) {
      stacked(r, i) = i > 0 ? s.states(r, i - 1) : 0.0;
      stacked(d + r, i) = s.states(r, i);
      stacked(2 * d + r, i) = i + 1 < n ? s.states(r, i + 1) : 0.0;
    }
  }
  Matrix pre(d, n);
  kernels::gemm_nn(params.W, stacked, pre);
  kernels::add_bias_cols(pre, params.b);
  Matrix out(d, n);
  kernels::tanh_forward(pre, out);
  return max_pool_columns(out);
}

int encode_pair_node(Tape& tape, int h1, int h2, int w, int b) {
  const int scores = tape.matmul_tn(h1, h2);          // n1 x n2
  const int weights = tape.softmax_rows(scores);      // n1 x n2
  const int aligned = tape.matmul_nt(h2, weights);    // d x n1
  const int stacked = tape.window_stack4(h1, aligned);
  const int pre = tape.affine_cols(w, stacked, b);
  const int activated = tape.tanh_map(pre);
  return tape.max_pool_cols(activated);
}

int encode_cnn_node(Tape& tape, int h, int w, int b) {
  const int stacked = tape.window_stack3(h);
  const int pre = tape.affine_cols(w, stacked, b);
  const int activated = tape.tanh_map(pre);
  return tape.max_pool_cols(activated);
}

}  // namespace hyperdef
