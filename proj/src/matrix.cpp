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

#include "hyperdef/matrix.hpp"

#include <cmath>

namespace hyperdef {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  int nr = static_cast<int>(rows.size());
  int nc = nr == 0 ? 0 : static_cast<int>(rows.begin()->size());
  Matrix m(nr, nc);
  int r = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != nc)
      throw ShapeError("from_rows: ragged row " + std::to_string(r));
    int c = 0;
    for (double x : row) m(r, c++) = x;
    ++r;
  }
  return m;
}

bool Matrix::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
}

void require_inner_match(const Matrix& a, const Matrix& b, const char* op) {
  if (a.cols() != b.rows())
    throw ShapeError(std::string(op) + ": inner dimensions disagree, " +
                     a.shape_str() + " * " + b.shape_str());
}

void require_finite(const Matrix& m, const char* op) {
  if (!m.all_finite())
    throw NumericError(std::string(op) + ": non-finite entry in " + m.shape_str() +
                       " result");
}

}  // namespace hyperdef
