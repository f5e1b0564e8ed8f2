// Copyright 2026 The nss Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nss/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nss/error.hpp"

namespace nss {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  if (!all_finite()) throw InvalidInputError("matrix contains non-finite entries");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  if (!m.all_finite()) throw InvalidInputError("diagonal contains non-finite entries");
  return m;
}

Matrix Matrix::from_columns(const std::vector<Vector>& columns) {
  if (columns.empty()) return {};
  const std::size_t d = columns.front().size();
  Matrix m(d, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != d) throw ShapeError("columns have inconsistent lengths");
    m.set_column(j, columns[j]);
  }
  if (!m.all_finite()) throw InvalidInputError("matrix contains non-finite entries");
  return m;
}

Matrix Matrix::from_column_major(std::size_t rows, std::size_t cols,
                                 std::span<const double> data) {
  if (data.size() != rows * cols) throw ShapeError("column-major payload has wrong length");
  Matrix m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = data[j * rows + i];
  if (!m.all_finite()) throw InvalidInputError("matrix contains non-finite entries");
  return m;
}

Vector Matrix::column(std::size_t j) const {
  if (j >= cols_) throw ShapeError("column index out of range");
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

void Matrix::set_column(std::size_t j, std::span<const double> values) {
  if (j >= cols_) throw ShapeError("column index out of range");
  if (values.size() != rows_) throw ShapeError("column length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

Matrix Matrix::columns(std::size_t first, std::size_t count) const {
  if (first + count > cols_) throw ShapeError("column range out of bounds");
  Matrix out(rows_, count);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, first + j);
  return out;
}

std::vector<double> Matrix::to_column_major() const {
  std::vector<double> out(data_.size());
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) out[j * rows_ + i] = (*this)(i, j);
  return out;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace nss
