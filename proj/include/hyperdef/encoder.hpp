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

#include <string>
#include <vector>

#include "hyperdef/embedding.hpp"
#include "hyperdef/matrix.hpp"
#include "hyperdef/tape.hpp"

namespace hyperdef {

// Hidden states of one token sequence, one d-dimensional column per position.
// In this light encoder the states are the raw embeddings.
struct FeatureMap {
  Matrix states;  // d x n
  int dim() const { return states.rows(); }
  int length() const { return states.cols(); }
};

// Raw matching energies and their row-softmaxed attention weights, one row
// per position of the first sequence.
struct AttentionWeights {
  Matrix scores;   // n1 x n2
  Matrix weights;  // n1 x n2, rows sum to 1
};

// One convolution parameter set: W is d x 4d for the attentive pair encoder,
// d x 3d for the plain definition encoder.
struct EncoderParams {
  Matrix W;
  Matrix b;  // d x 1
};

// Column i is the embedding of token i. Unknown tokens get the table's
// deterministic hash-seeded vector. cap > 0 truncates the sequence.
FeatureMap embed_sequence(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                          int cap = 0);

// scores[i][j] = dot(h_i^A, h_j^B); weights = row-wise softmax of scores.
AttentionWeights match_scores(const FeatureMap& a, const FeatureMap& b);

// Convex combination of B's states under one attention row (must sum to 1
// within 1e-6).
Matrix align(const FeatureMap& b, const std::vector<double>& weights_row);

// All aligned states at once: column i = sum_j weights[i][j] * h_j^B.
Matrix aligned_states(const FeatureMap& b, const AttentionWeights& attention);

// Column i = tanh(W * [h_{i-1}; h_i; h_{i+1}; aligned_i] + b), with zero
// vectors past both sequence ends.
Matrix attentive_convolve(const FeatureMap& a, const Matrix& aligned,
                          const EncoderParams& params);

// Full pair encoding: match, align, convolve over S1, then column max-pool.
// Asymmetric in (S1, S2) by construction.
Matrix encode_pair(const FeatureMap& s1, const FeatureMap& s2, const EncoderParams& params);

// Plain convolution encoder without attention: per-position
// tanh(W * [h_{i-1}; h_i; h_{i+1}] + b), then column max-pool.
Matrix encode_cnn(const FeatureMap& s, const EncoderParams& params);

// Tape-graph versions producing the same values as the plain functions,
// with gradients. h1/h2/w/b are node ids of the state maps and parameters.
int encode_pair_node(Tape& tape, int h1, int h2, int w, int b);
int encode_cnn_node(Tape& tape, int h, int w, int b);

}  // namespace hyperdef
