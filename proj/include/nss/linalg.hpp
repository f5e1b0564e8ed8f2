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

#ifndef NSS_LINALG_HPP_
#define NSS_LINALG_HPP_

#include <span>
#include <vector>

#include "nss/matrix.hpp"

namespace nss {

// Elementary kernels. Evaluation order is fixed (row-major outer loops, the
// inner loop runs over the shared dimension in increasing index order), so
// results are reproducible bit for bit. All throw ShapeError on
// non-conformable operands.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double factor);
// a * b^T without materialising the transpose.
Matrix matmul_transposed(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
double frobenius_norm(const Matrix& m);
double trace(const Matrix& m);

// Eigenpairs of a symmetric matrix. Columns of `vectors` are orthonormal and
// ordered by non-increasing eigenvalue; each column is sign-normalised so its
// largest-magnitude entry (lowest index on ties) is positive.
struct EigenDecomposition {
  Matrix vectors;
  std::vector<double> values;
};

// Input is symmetrised as (M + M^T)/2 before factorisation. Throws ShapeError
// for non-square input and InvalidInputError for non-finite entries or an
// asymmetry above 1e-10 * ||M||_F.
EigenDecomposition eig_symmetric(const Matrix& m);

// max(rows, cols) * 1e-12.
double default_pinv_tolerance(const Matrix& m);

// Moore-Penrose pseudoinverse via SVD. Singular values at or below
// tol_rel * sigma_max are treated as zero.
Matrix pseudoinverse(const Matrix& m, double tol_rel);
inline Matrix pseudoinverse(const Matrix& m) { return pseudoinverse(m, default_pinv_tolerance(m)); }

}  // namespace nss

#endif  // NSS_LINALG_HPP_
