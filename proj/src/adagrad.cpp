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

#include "hyperdef/adagrad.hpp"

#include <cmath>
#include <string>

namespace hyperdef {

void AdaGradState::reset(const std::vector<Matrix*>& params) {
  accumulators.clear();
  accumulators.reserve(params.size());
  for (const Matrix* p : params) {
    accumulators.emplace_back(p->rows(), p->cols());
  }
}

void adagrad_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                  AdaGradState& state) {
  if (params.size() != grads.size() || params.size() != state.accumulators.size()) {
    throw ShapeError("adagrad_step: " + std::to_string(params.size()) + " params vs " +
                     std::to_string(grads.size()) + " grads vs " +
                     std::to_string(state.accumulators.size()) + " accumulators");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    Matrix& p = *params[t];
    const Matrix& g = grads[t];
    Matrix& acc = state.accumulators[t];
    require_same_shape(p, g, "adagrad_step");
    require_same_shape(p, acc, "adagrad_step");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g.data()[i];
      acc.data()[i] += gi * gi;
      p.data()[i] -= state.learning_rate * gi / (std::sqrt(acc.data()[i]) + state.epsilon);
    }
  }
}

}  // namespace hyperdef
