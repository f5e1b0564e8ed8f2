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

#include "nss/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "nss/bundle_io.hpp"
#include "nss/error.hpp"
#include "nss/instances.hpp"
#include "nss/linalg.hpp"
#include "nss/nullspace.hpp"
#include "nss/oracle.hpp"
#include "nss/steering.hpp"

namespace nss {
namespace {

using instances::Rng;

class Tracker {
 public:
  void record(const std::string& name, double value, double tolerance) {
    auto [it, inserted] = index_.try_emplace(name, results_.size());
    if (inserted) results_.push_back({name, value, tolerance, 0, 0});
    InvariantResult& r = results_[it->second];
    ++r.checks;
    if (std::isnan(value) || value > tolerance) ++r.failures;
    if (std::isnan(value) || value > r.worst) r.worst = value;
  }
  void flag(const std::string& name, bool ok) { record(name, ok ? 0.0 : 1.0, 0.0); }
  std::vector<InvariantResult> take() { return std::move(results_); }

 private:
  std::vector<InvariantResult> results_;
  std::map<std::string, std::size_t> index_;
};

double rel(double num, double den) { return den == 0.0 ? num : num / den; }

void check_numerics(Tracker& t, Rng& rng) {
  const std::size_t d = instances::uniform_int(rng, 2, 32);
  const Matrix h = instances::gaussian(rng, d, instances::uniform_int(rng, 1, 2 * d));
  const Matrix m = gram(h);
  const EigenDecomposition eig = eig_symmetric(m);
  const double fro = frobenius_norm(m);
  const Matrix recon =
      matmul(matmul(eig.vectors, Matrix::diagonal(eig.values)), transpose(eig.vectors));
  t.record("eig reconstruction", frobenius_norm(subtract(recon, m)) / std::max(fro, 1.0), 1e-8);
  const Matrix gram_u = matmul(transpose(eig.vectors), eig.vectors);
  t.record("eig orthonormality",
           frobenius_norm(subtract(gram_u, Matrix::identity(d))) / static_cast<double>(d), 1e-10);
  const double lmax = eig.values.front();
  t.record("eig psd floor", std::max(0.0, -eig.values.back()) / std::max(lmax, 1.0), 1e-10);
  bool sorted = std::is_sorted(eig.values.rbegin(), eig.values.rend());
  t.flag("eig descending order", sorted);

  const EigenDecomposition ref = oracle::jacobi_eigen(m);
  double worst = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    worst = std::max(worst, std::abs(eig.values[i] - ref.values[i]));
  t.record("eig vs jacobi eigenvalues", worst / std::max(lmax, 1.0), 1e-10);

  const std::size_t rows = instances::uniform_int(rng, 1, 12);
  const std::size_t cols = instances::uniform_int(rng, 1, 12);
  const std::size_t rank = instances::uniform_int(rng, 1, std::min(rows, cols));
  const Matrix a = instances::low_rank(rng, rows, rank, cols);
  const Matrix ap = pseudoinverse(a);
  const auto pen = oracle::penrose_residuals(a, ap);
  const double scale_a = std::max(frobenius_norm(a), 1.0);
  t.record("pinv penrose conditions", *std::max_element(pen.begin(), pen.end()) / scale_a, 1e-8);
  t.record("pinv involution",
           rel(frobenius_norm(subtract(pseudoinverse(ap), a)), frobenius_norm(a)), 1e-8);
}

void check_nullspace(Tracker& t, Rng& rng, std::size_t instance) {
  const std::size_t d = instances::uniform_int(rng, 2, 32);
  std::size_t rank = instances::uniform_int(rng, 0, d);
  std::size_t n = instances::uniform_int(rng, 1, 2 * d);
  if (instance % 10 == 0) rank = 0;
  if (instance % 10 == 1) {
    rank = d;
    n = std::max(n, d);
  }
  const Matrix h = instances::low_rank(rng, d, rank, n);
  const std::size_t true_rank = std::min({rank, n, d});
  const RankPolicy policy = RankPolicy::relative();
  const ProjectionMatrix proj = null_projection(h, policy);
  const Matrix& p = proj.p;
  const double dd = static_cast<double>(d);

  t.record("projector symmetry", frobenius_norm(subtract(p, transpose(p))) / dd, 1e-10);
  t.record("projector idempotence", frobenius_norm(subtract(matmul(p, p), p)) / dd, 1e-8);
  t.record("projector annihilates benign",
           rel(frobenius_norm(matmul(p, h)), frobenius_norm(h)), 1e-6);
  t.record("projector trace equals rank",
           std::abs(trace(p) - static_cast<double>(proj.retained_rank)), 1e-6);
  t.flag("retained rank = d - rank(H_b)", proj.retained_rank == d - true_rank);

  const EquivalenceReport eq = nullspace_equivalence_check(h, policy);
  t.flag("gram vs direct QR rank", eq.gram_rank == eq.direct_rank);
  t.record("gram vs direct QR projector", eq.discrepancy / dd, 1e-6);

  const Matrix basis = oracle::gram_schmidt_null_basis(h, 1e-9);
  t.flag("gram vs gram-schmidt rank", basis.cols() == proj.retained_rank);
  if (basis.cols() == proj.retained_rank) {
    t.record("gram vs gram-schmidt projector",
             frobenius_norm(subtract(p, matmul_transposed(basis, basis))) / dd, 1e-6);
  }

  const Matrix x = instances::gaussian(rng, d, 1);
  const Vector xv = x.column(0);
  t.record("projector non-expansive", norm(matvec(p, xv)) / norm(xv) - 1.0, 1e-10);
  if (true_rank > 0) {
    const Vector in_span = matvec(h, instances::gaussian(rng, n, 1).column(0));
    t.record("benign span invariance", rel(norm(matvec(p, in_span)), norm(in_span)), 1e-6);
  }
}

void check_solver(Tracker& t, Rng& rng) {
  const instances::SolverProblem prob = instances::solver_problem(rng, 2, 16);
  const Matrix& p = prob.projector.p;
  const std::size_t d = p.rows();
  SolverConfig cfg;
  cfg.alpha = prob.alpha;
  cfg.beta = prob.beta;
  const SteeringArtifact art =
      solve_transform(prob.malicious, prob.refusal, prob.attribution, prob.projector, cfg);

  t.record("normal equation residual",
           normal_equation_residual(art.delta, prob.malicious, prob.refusal, prob.attribution, p,
                                    prob.alpha, prob.beta),
           1e-6);
  t.record("benign annihilation", benign_annihilation(art, prob.benign), 1e-5);

  auto objective = [&](const Matrix& w) {
    return oracle::compact_objective(w, prob.malicious, prob.refusal, prob.attribution, p,
                                     prob.alpha, prob.beta);
  };
  const double best = objective(art.delta);
  double worst_gain = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Matrix g = matmul(instances::gaussian(rng, d, d), p);
    const double eps = std::pow(10.0, instances::uniform_real(rng, -6.0, -1.0));
    const double value = objective(add(art.delta, scale(g, eps)));
    worst_gain = std::max(worst_gain, rel(best - value, best));
  }
  t.record("optimality under row-space perturbation", worst_gain, 1e-8);

  const Matrix complement = subtract(Matrix::identity(d), p);
  const Matrix g = matmul(instances::gaussian(rng, d, d), complement);
  const Matrix shifted = add(art.delta, g);
  t.record("kernel shift leaves objective", rel(std::abs(objective(shifted) - best), std::max(best, 1.0)), 1e-10);
  t.record("minimum norm",
           rel(frobenius_norm(art.delta) - frobenius_norm(shifted), frobenius_norm(shifted)), 1e-8);

  SolverConfig stiffer = cfg;
  stiffer.alpha = cfg.alpha * instances::uniform_real(rng, 1.5, 4.0);
  const SteeringArtifact art2 =
      solve_transform(prob.malicious, prob.refusal, prob.attribution, prob.projector, stiffer);
  const double n1 = frobenius_norm(matmul(art.delta, p));
  const double n2 = frobenius_norm(matmul(art2.delta, p));
  t.record("alpha monotonicity", rel(n2 - n1, std::max(n1, 1.0)), 1e-10);

  const Vector h1 = instances::gaussian(rng, d, 1).column(0);
  const Vector h2 = instances::gaussian(rng, d, 1).column(0);
  const double a = instances::uniform_real(rng, -3.0, 3.0);
  const double b = instances::uniform_real(rng, -3.0, 3.0);
  const double lambda = instances::uniform_real(rng, 0.5, 10.0);
  Vector mix(d);
  for (std::size_t i = 0; i < d; ++i) mix[i] = a * h1[i] + b * h2[i];
  const Vector s1 = steer(h1, art, lambda);
  const Vector s2 = steer(h2, art, lambda);
  const Vector sm = steer(mix, art, lambda);
  double lin_err = 0.0;
  double lin_ref = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double lhs = sm[i] - mix[i];
    const double rhs = a * (s1[i] - h1[i]) + b * (s2[i] - h2[i]);
    lin_err += (lhs - rhs) * (lhs - rhs);
    lin_ref += rhs * rhs;
  }
  t.record("steering linearity", rel(std::sqrt(lin_err), std::max(std::sqrt(lin_ref), norm(mix) * 1e-6)), 1e-10);

  const Vector unit = steer_displacement(h1, art, 1.0);
  const Vector scaled = steer_displacement(h1, art, lambda);
  t.record("lambda proportionality", rel(std::abs(norm(scaled) - lambda * norm(unit)), lambda * norm(unit)), 1e-12);

  Matrix batch(d, 3);
  batch.set_column(0, h1);
  batch.set_column(1, h2);
  batch.set_column(2, mix);
  const Matrix sb = steer_batch(batch, art, lambda);
  t.flag("steer_batch matches per-column steer",
         sb.column(0) == s1 && sb.column(1) == s2 && sb.column(2) == sm);

  // Analytic gradient against central differences.
  const Matrix w = instances::gaussian(rng, d, d);
  const Matrix grad = oracle::gradient(w, prob.malicious, prob.refusal, prob.attribution, p,
                                       prob.alpha, prob.beta);
  const double gscale = frobenius_norm(grad);
  double worst_fd = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t i = instances::uniform_int(rng, 0, d - 1);
    const std::size_t j = instances::uniform_int(rng, 0, d - 1);
    const double fd = oracle::central_difference(objective, w, i, j, 1e-6);
    worst_fd = std::max(worst_fd, std::abs(fd - grad(i, j)) / std::max(std::abs(grad(i, j)), 1e-6 * gscale + 1e-12));
  }
  t.record("gradient vs finite differences", worst_fd, 1e-4);

  // Gradient descent from zero lands on the same effective transform.
  oracle::GradientSolveConfig gcfg;
  gcfg.steps = 20000;
  gcfg.learning_rate = oracle::suggested_learning_rate(prob.malicious, p, prob.alpha, prob.beta);
  gcfg.growth = 1.05;
  gcfg.gradient_tol = 1e-11 * std::max(best, 1.0);
  const auto gd = oracle::gradient_solve(prob.malicious, prob.refusal, prob.attribution, p,
                                         prob.alpha, prob.beta, gcfg);
  t.record("closed form vs gradient descent objective",
           rel(std::abs(gd.objective - best), std::max(best, 1e-300)), 1e-6);
  const Matrix eff = matmul(art.delta, p);
  const double eff_norm = frobenius_norm(eff);
  if (eff_norm > 0.0) {
    t.record("closed form vs gradient descent transform",
             frobenius_norm(subtract(eff, matmul(gd.w, p))) / eff_norm, 1e-3);
  }
}

void check_ridge(Tracker& t, Rng& rng) {
  const std::size_t d = instances::uniform_int(rng, 2, 8);
  const std::size_t n = instances::uniform_int(rng, 1, 10);
  const Matrix h = instances::gaussian(rng, d, n);
  const Matrix r = instances::gaussian(rng, d, n);
  const Matrix v = instances::gaussian(rng, d, n);
  const double alpha = instances::uniform_real(rng, 0.1, 2.0);
  ProjectionMatrix identity;
  identity.p = Matrix::identity(d);
  identity.retained_rank = d;
  SolverConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = 0.0;
  const SteeringArtifact art = solve_transform(h, r, v, identity, cfg);

  Matrix system = oracle::naive_matmul(h, transpose(h));
  for (std::size_t i = 0; i < d; ++i) system(i, i) += alpha;
  const Matrix ridge =
      oracle::naive_matmul(oracle::naive_matmul(r, transpose(h)), oracle::explicit_inverse(system));
  t.record("ridge special case", frobenius_norm(subtract(art.delta, ridge)) / frobenius_norm(ridge),
           1e-8);
}

void check_formats(Tracker& t, Rng& rng) {
  const std::size_t d = instances::uniform_int(rng, 2, 12);
  ActivationBundle bundle;
  bundle.role = static_cast<Role>(instances::uniform_int(rng, 0, 4));
  bundle.layer_tag = static_cast<std::int32_t>(instances::uniform_int(rng, 0, 40));
  bundle.seed = static_cast<std::int64_t>(instances::uniform_int(rng, 0, 1u << 30));
  bundle.data = instances::gaussian(rng, d, instances::uniform_int(rng, 1, 9));
  t.flag("bundle round trip", decode_bundle(encode_bundle(bundle)) == bundle);

  const Matrix benign = instances::low_rank(rng, d, instances::uniform_int(rng, 0, d - 1), d);
  const ProjectionMatrix proj = null_projection(benign, RankPolicy::relative());
  SolverConfig cfg;
  const Matrix hm = instances::gaussian(rng, d, 4);
  const SteeringArtifact art = solve_transform(hm, instances::gaussian(rng, d, 4),
                                               instances::gaussian(rng, d, 4), proj, cfg);
  const auto bytes = encode_artifact(art);
  const SteeringArtifact back = decode_artifact(bytes);
  t.flag("artifact round trip", back.delta == art.delta && back.projector.p == art.projector.p &&
                                    back.alpha == art.alpha && back.beta == art.beta &&
                                    back.projector.retained_rank == art.projector.retained_rank);

  auto corrupted = bytes;
  const std::size_t pos = instances::uniform_int(rng, 0, corrupted.size() - 1);
  corrupted[pos] ^= static_cast<std::uint8_t>(1u << instances::uniform_int(rng, 0, 7));
  bool detected = false;
  try {
    decode_artifact(corrupted);
  } catch (const CorruptArtifactError&) {
    detected = true;
  }
  t.flag("flipped artifact byte detected", detected);
}

}  // namespace

bool VerifyReport::all_pass() const noexcept {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass(); });
}

VerifyReport run_invariant_suite(std::size_t seed_count, std::uint64_t base_seed) {
  if (seed_count == 0) throw InvalidInputError("verify: seed count must be >= 1");
  Tracker t;
  for (std::size_t s = 0; s < seed_count; ++s) {
    Rng rng(base_seed * 1000003ull + s);
    check_numerics(t, rng);
    check_nullspace(t, rng, s);
    check_solver(t, rng);
    check_ridge(t, rng);
    check_formats(t, rng);
  }
  VerifyReport report;
  report.results = t.take();
  report.instances = seed_count;
  return report;
}

std::string render_verify_report(const VerifyReport& report) {
  std::ostringstream os;
  for (const auto& r : report.results) {
    os << (r.pass() ? "PASS " : "FAIL ") << std::left << std::setw(44) << r.name
       << " worst=" << std::setprecision(3) << std::scientific << r.worst
       << " tol=" << r.tolerance << std::defaultfloat << " checks=" << r.checks;
    if (!r.pass()) os << " failures=" << r.failures;
    os << "\n";
  }
  os << (report.all_pass() ? "all invariants hold" : "INVARIANT FAILURES") << " over "
     << report.instances << " instance(s)\n";
  return os.str();
}

}  // namespace nss
