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

#include "nss/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "nss/error.hpp"

namespace nss {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> as_eigen(const Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": operand shapes differ");
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_transposed: inner dimensions differ");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto bj = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += ai[k] * bj[k];
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

Matrix scale(const Matrix& a, double factor) {
  Matrix out = a;
  for (double& v : out.data()) v *= factor;
  return out;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw ShapeError("matvec: dimension mismatch");
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) acc += ai[k] * x[k];
    out[i] = acc;
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double frobenius_norm(const Matrix& m) {
  double acc = 0.0;
  for (double v : m.data()) acc += v * v;
  return std::sqrt(acc);
}

double trace(const Matrix& m) {
  if (!m.is_square()) throw ShapeError("trace: matrix is not square");
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) acc += m(i, i);
  return acc;
}

EigenDecomposition eig_symmetric(const Matrix& m) {
  if (!m.is_square()) throw ShapeError("eig_symmetric: matrix is not square");
  if (!m.all_finite()) throw InvalidInputError("eig_symmetric: non-finite entries");
  const std::size_t n = m.rows();
  if (n == 0) return {};

  const double fro = frobenius_norm(m);
  const Matrix asym = subtract(m, transpose(m));
  if (frobenius_norm(asym) > 1e-10 * std::max(fro, 1.0) * 2.0)
    throw InvalidInputError("eig_symmetric: matrix is not symmetric");

  const RowMajor sym = 0.5 * (as_eigen(m) + as_eigen(m).transpose());
  Eigen::SelfAdjointEigenSolver<RowMajor> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw InvalidInputError("eig_symmetric: eigensolver did not converge");

  // Eigen reports ascending order; emit descending with a stable tie order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& evals = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return evals(static_cast<Eigen::Index>(a)) > evals(static_cast<Eigen::Index>(b));
  });

  EigenDecomposition out{Matrix(n, n), std::vector<double>(n)};
  const auto& evecs = solver.eigenvectors();
  for (std::size_t c = 0; c < n; ++c) {
    const auto src = static_cast<Eigen::Index>(order[c]);
    out.values[c] = evals(src);
    std::size_t pivot = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::abs(evecs(static_cast<Eigen::Index>(i), src));
      if (mag > best) {
        best = mag;
        pivot = i;
      }
    }
    const double sign = evecs(static_cast<Eigen::Index>(pivot), src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i)
      out.vectors(i, c) = sign * evecs(static_cast<Eigen::Index>(i), src);
  }
  return out;
}

double default_pinv_tolerance(const Matrix& m) {
  return 1e-12 * static_cast<double>(std::max<std::size_t>({m.rows(), m.cols(), 1}));
}

Matrix pseudoinverse(const Matrix& m, double tol_rel) {
  if (!(tol_rel > 0.0)) throw InvalidInputError("pseudoinverse: tolerance must be positive");
  if (!m.all_finite()) throw InvalidInputError("pseudoinverse: non-finite entries");
  Matrix out(m.cols(), m.rows());
  if (m.empty()) return out;

  const RowMajor a = as_eigen(m);
  Eigen::JacobiSVD<RowMajor> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  if (sigma_max == 0.0) return out;
  const double cutoff = tol_rel * sigma_max;

  const auto& u = svd.matrixU();
  const auto& v = svd.matrixV();
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    if (sigma(k) <= cutoff) continue;
    const double inv = 1.0 / sigma(k);
    for (std::size_t i = 0; i < m.cols(); ++i) {
      const double vik = v(static_cast<Eigen::Index>(i), k) * inv;
      for (std::size_t j = 0; j < m.rows(); ++j)
        out(i, j) += vik * u(static_cast<Eigen::Index>(j), k);
    }
  }
  return out;
}

}  // namespace nss
