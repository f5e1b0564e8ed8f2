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

#include "nss/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace nss::oracle {
namespace {

Matrix naive_transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

double naive_sq_norm(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * a(i, j);
  return acc;
}

Matrix naive_diff(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
  return out;
}

void sign_normalise(Matrix& vectors) {
  const std::size_t n = vectors.rows();
  for (std::size_t c = 0; c < vectors.cols(); ++c) {
    std::size_t pivot = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(vectors(i, c)) > std::abs(vectors(pivot, c))) pivot = i;
    if (vectors(pivot, c) < 0.0)
      for (std::size_t i = 0; i < n; ++i) vectors(i, c) = -vectors(i, c);
  }
}

struct Problem {
  Matrix x;  // P H_m
  Matrix y;  // R + beta V
  double reg;
};

Problem make_problem(const Matrix& malicious, const Matrix& refusal, const Matrix& attribution,
                     const Matrix& p, double alpha, double beta) {
  if (p.rows() != malicious.rows() || p.cols() != malicious.rows() ||
      refusal.rows() != malicious.rows() || refusal.cols() != malicious.cols() ||
      attribution.rows() != malicious.rows() || attribution.cols() != malicious.cols()) {
    throw ShapeError("oracle: inconsistent problem shapes");
  }
  Problem prob{naive_matmul(p, malicious), Matrix(refusal.rows(), refusal.cols()), alpha + beta};
  for (std::size_t i = 0; i < refusal.rows(); ++i)
    for (std::size_t j = 0; j < refusal.cols(); ++j)
      prob.y(i, j) = refusal(i, j) + beta * attribution(i, j);
  return prob;
}

double objective_of(const Problem& prob, const Matrix& w, const Matrix& p) {
  return naive_sq_norm(naive_diff(naive_matmul(w, prob.x), prob.y)) +
         prob.reg * naive_sq_norm(naive_matmul(w, p));
}

Matrix gradient_of(const Problem& prob, const Matrix& w, const Matrix& p) {
  const Matrix resid = naive_diff(naive_matmul(w, prob.x), prob.y);
  const Matrix g1 = naive_matmul(resid, naive_transpose(prob.x));
  const Matrix g2 = naive_matmul(naive_matmul(w, p), naive_transpose(p));
  Matrix g(w.rows(), w.cols());
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = 2.0 * g1(i, j) + 2.0 * prob.reg * g2(i, j);
  return g;
}

}  // namespace

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("naive_matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

EigenDecomposition jacobi_eigen(const Matrix& m, int max_sweeps) {
  if (!m.is_square()) throw ShapeError("jacobi_eigen: matrix is not square");
  const std::size_t n = m.rows();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
  Matrix v = Matrix::identity(n);

  const double scale_ref = std::sqrt(naive_sq_norm(a));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale_ref) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  EigenDecomposition out{Matrix(n, n), std::vector<double>(n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, c) = v(i, order[c]);
  }
  sign_normalise(out.vectors);
  return out;
}

Matrix gram_schmidt_null_basis(const Matrix& h, double tol) {
  const std::size_t d = h.rows();
  const double cutoff = tol * std::sqrt(naive_sq_norm(h));

  // Orthonormal basis of the column span, greedily taking the column with the
  // largest remaining residual.
  std::vector<Vector> residual;
  for (std::size_t j = 0; j < h.cols(); ++j) residual.push_back(h.column(j));
  std::vector<Vector> span_basis;
  while (span_basis.size() < d && !residual.empty()) {
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t j = 0; j < residual.size(); ++j) {
      double acc = 0.0;
      for (double x : residual[j]) acc += x * x;
      if (std::sqrt(acc) > best_norm) {
        best_norm = std::sqrt(acc);
        best = j;
      }
    }
    if (best_norm <= cutoff || best_norm == 0.0) break;
    Vector q = residual[best];
    // Second pass against the accepted basis for numerical orthogonality.
    for (const Vector& b : span_basis) {
      double proj = 0.0;
      for (std::size_t i = 0; i < d; ++i) proj += b[i] * q[i];
      for (std::size_t i = 0; i < d; ++i) q[i] -= proj * b[i];
    }
    double qn = 0.0;
    for (double x : q) qn += x * x;
    qn = std::sqrt(qn);
    for (double& x : q) x /= qn;
    residual.erase(residual.begin() + static_cast<std::ptrdiff_t>(best));
    for (Vector& r : residual) {
      double proj = 0.0;
      for (std::size_t i = 0; i < d; ++i) proj += q[i] * r[i];
      for (std::size_t i = 0; i < d; ++i) r[i] -= proj * q[i];
    }
    span_basis.push_back(std::move(q));
  }

  // Complete with standard basis vectors, again picking the largest residual.
  std::vector<Vector> null_basis;
  const std::size_t want = d - span_basis.size();
  std::vector<bool> used(d, false);
  while (null_basis.size() < want) {
    Vector best_vec;
    double best_norm = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t e = 0; e < d; ++e) {
      if (used[e]) continue;
      Vector x(d, 0.0);
      x[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto* set : {&span_basis, &null_basis}) {
          for (const Vector& b : *set) {
            double proj = 0.0;
            for (std::size_t i = 0; i < d; ++i) proj += b[i] * x[i];
            for (std::size_t i = 0; i < d; ++i) x[i] -= proj * b[i];
          }
        }
      }
      double xn = 0.0;
      for (double v : x) xn += v * v;
      xn = std::sqrt(xn);
      if (xn > best_norm) {
        best_norm = xn;
        best_vec = std::move(x);
        best_idx = e;
      }
    }
    for (double& v : best_vec) v /= best_norm;
    used[best_idx] = true;
    null_basis.push_back(std::move(best_vec));
  }

  Matrix out(d, null_basis.size());
  for (std::size_t j = 0; j < null_basis.size(); ++j) out.set_column(j, null_basis[j]);
  return out;
}

Matrix explicit_inverse(const Matrix& m) {
  if (!m.is_square()) throw ShapeError("explicit_inverse: matrix is not square");
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (a(pivot, col) == 0.0) throw InvalidInputError("explicit_inverse: matrix is singular");
    if (pivot != col) {
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(a(pivot, k), a(col, k));
        std::swap(inv(pivot, k), inv(col, k));
      }
    }
    const double diag = a(col, col);
    for (std::size_t k = 0; k < n; ++k) {
      a(col, k) /= diag;
      inv(col, k) /= diag;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a(r, k) -= f * a(col, k);
        inv(r, k) -= f * inv(col, k);
      }
    }
  }
  return inv;
}

std::array<double, 4> penrose_residuals(const Matrix& a, const Matrix& a_pinv) {
  const Matrix aap = naive_matmul(a, a_pinv);
  const Matrix apa = naive_matmul(a_pinv, a);
  return {std::sqrt(naive_sq_norm(naive_diff(naive_matmul(aap, a), a))),
          std::sqrt(naive_sq_norm(naive_diff(naive_matmul(apa, a_pinv), a_pinv))),
          std::sqrt(naive_sq_norm(naive_diff(naive_transpose(aap), aap))),
          std::sqrt(naive_sq_norm(naive_diff(naive_transpose(apa), apa)))};
}

double compact_objective(const Matrix& w, const Matrix& malicious, const Matrix& refusal,
                         const Matrix& attribution, const Matrix& p, double alpha, double beta) {
  return objective_of(make_problem(malicious, refusal, attribution, p, alpha, beta), w, p);
}

Matrix gradient(const Matrix& w, const Matrix& malicious, const Matrix& refusal,
                const Matrix& attribution, const Matrix& p, double alpha, double beta) {
  if (w.rows() != p.rows() || w.cols() != p.cols()) throw ShapeError("gradient: W must be d x d");
  return gradient_of(make_problem(malicious, refusal, attribution, p, alpha, beta), w, p);
}

double central_difference(const std::function<double(const Matrix&)>& f, const Matrix& w,
                          std::size_t i, std::size_t j, double step) {
  Matrix plus = w;
  Matrix minus = w;
  plus(i, j) += step;
  minus(i, j) -= step;
  return (f(plus) - f(minus)) / (2.0 * step);
}

void GradientSolveConfig::validate() const {
  if (steps < 1) throw ConfigError("gradient_solve: steps must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("gradient_solve: learning rate must be > 0");
  if (!(growth >= 1.0)) throw ConfigError("gradient_solve: growth must be >= 1");
  if (!(gradient_tol >= 0.0)) throw ConfigError("gradient_solve: gradient_tol must be >= 0");
}

double suggested_learning_rate(const Matrix& malicious, const Matrix& p, double alpha,
                               double beta) {
  return 0.5 / (naive_sq_norm(naive_matmul(p, malicious)) + alpha + beta);
}

GradientSolveResult gradient_solve(const Matrix& malicious, const Matrix& refusal,
                                   const Matrix& attribution, const Matrix& p, double alpha,
                                   double beta, const GradientSolveConfig& cfg) {
  cfg.validate();
  const Problem prob = make_problem(malicious, refusal, attribution, p, alpha, beta);
  const std::size_t d = p.rows();

  Matrix w(d, d);
  if (cfg.init == GradientSolveConfig::Init::kSeededGaussian) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : w.data()) x = normal(rng);
  }

  double current = objective_of(prob, w, p);
  double lr = cfg.learning_rate;
  std::vector<double> rejected;
  GradientSolveResult out;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const Matrix g = gradient_of(prob, w, p);
    if (cfg.gradient_tol > 0.0 && std::sqrt(naive_sq_norm(g)) <= cfg.gradient_tol) break;
    Matrix trial = w;
    for (std::size_t k = 0; k < trial.size(); ++k) trial.data()[k] -= lr * g.data()[k];
    const double value = objective_of(prob, trial, p);
    if (value > current) {
      // An increase at rounding level means J can no longer resolve progress.
      // Without a gradient target that is convergence; with one, keep
      // shrinking the step since the gradient still carries information.
      if (value - current <= 1e-13 * std::abs(current)) {
        if (cfg.gradient_tol == 0.0) break;
        lr *= 0.5;
        continue;
      }
      rejected.push_back(value);
      if (rejected.size() >= 10) {
        throw DivergenceError("gradient_solve: objective increased on 10 consecutive steps",
                              rejected);
      }
      lr *= 0.5;
      continue;
    }
    rejected.clear();
    w = std::move(trial);
    current = value;
    lr *= cfg.growth;
    ++out.accepted_steps;
  }
  out.gradient_norm = std::sqrt(naive_sq_norm(gradient_of(prob, w, p)));
  out.objective = current;
  out.w = std::move(w);
  return out;
}

}  // namespace nss::oracle
