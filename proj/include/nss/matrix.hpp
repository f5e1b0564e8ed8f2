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

#ifndef NSS_MATRIX_HPP_
#define NSS_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace nss {

using Vector = std::vector<double>;

// Dense float64 matrix, row-major. Entries are checked for finiteness when a
// matrix is built from caller data; mutable element access is unchecked.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  // Throws ShapeError when data.size() != rows * cols and InvalidInputError
  // when any entry is NaN or infinite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> values);
  // Builds a d x N matrix whose column j is columns[j].
  static Matrix from_columns(const std::vector<Vector>& columns);
  // Builds from column-major storage (the on-disk bundle layout).
  static Matrix from_column_major(std::size_t rows, std::size_t cols,
                                  std::span<const double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  Vector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);
  // Columns [first, first + count).
  Matrix columns(std::size_t first, std::size_t count) const;
  std::vector<double> to_column_major() const;

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace nss

#endif  // NSS_MATRIX_HPP_
