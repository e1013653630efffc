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

#include <vector>

#include "hyperdef/matrix.hpp"

namespace hyperdef {

// Adaptive gradient descent with per-entry accumulators. Accumulators only
// grow, so each entry's effective step size never increases.
struct AdaGradState {
  double learning_rate = 0.02;
  double epsilon = 1e-8;
  std::vector<Matrix> accumulators;  // one per parameter tensor, same shapes

  // Sizes accumulators to match the given parameter tensors, all zeros.
  void reset(const std::vector<Matrix*>& params);
};

// Per entry: accumulator += g^2; param -= lr * g / (sqrt(accumulator) + eps).
void adagrad_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                  AdaGradState& state);

}  // namespace hyperdef
