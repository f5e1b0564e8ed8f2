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

#include "nss/evaluation.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "nss/error.hpp"
#include "nss/linalg.hpp"

namespace nss {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

const Matrix& zeros_like_or(const Matrix& refusal, bool use, Matrix& scratch) {
  if (use) return refusal;
  scratch = Matrix(refusal.rows(), refusal.cols());
  return scratch;
}

SweepRow row_for(const std::string& sweep, double value, const SteeringArtifact& artifact,
                 const EvalData& data, double lambda) {
  SweepRow row;
  row.sweep = sweep;
  row.value = value;
  row.retained_rank = artifact.projector.retained_rank;
  row.benign_drift_rel = mean_relative_drift(data.benign_holdout, artifact, lambda);
  row.malicious_alignment =
      mean_alignment(data.malicious_holdout, data.refusal_holdout, artifact, lambda);
  row.displacement_norm = mean_displacement_norm(data.malicious_holdout, artifact, lambda);
  row.probe_rate_post_benign =
      harm_probe_rate(steer_batch(data.benign_holdout, artifact, lambda), data.probe);
  row.probe_rate_post_malicious =
      harm_probe_rate(steer_batch(data.malicious_holdout, artifact, lambda), data.probe);
  return row;
}

}  // namespace

FitResult fit_transform(const Matrix& benign, const Matrix& malicious, const Matrix& masked,
                        const Matrix& refusal, const SolverConfig& cfg) {
  if (benign.rows() != malicious.rows() || masked.rows() != malicious.rows() ||
      refusal.rows() != malicious.rows()) {
    throw ShapeError("fit: bundles disagree on the activation dimension");
  }
  const Matrix attribution = attribution_deltas(malicious, masked);
  const ProjectionMatrix projector = null_projection(benign, cfg.rank_policy);

  FitResult out;
  out.artifact = solve_transform(malicious, refusal, attribution, projector, cfg);
  Matrix scratch;
  out.normal_residual = normal_equation_residual(
      out.artifact.delta, malicious, zeros_like_or(refusal, cfg.use_refusal_target, scratch),
      attribution, projector.p, cfg.alpha, cfg.beta);
  out.benign_annihilation = benign_annihilation(out.artifact, benign);
  return out;
}

EvalData eval_data_from(const SynthDataset& ds) {
  EvalData data;
  data.benign = ds.benign;
  data.malicious = ds.malicious;
  data.masked = ds.malicious_masked;
  data.refusal = ds.refusal;
  data.benign_holdout = ds.benign_holdout;
  data.malicious_holdout = ds.malicious_holdout;
  data.refusal_holdout = ds.refusal_holdout;
  data.probe = ds.probe;
  data.refusal_states = ds.refusal_states;
  data.compliance_states = ds.compliance_states;
  return data;
}

double mean_relative_drift(const Matrix& h, const SteeringArtifact& artifact, double lambda) {
  double acc = 0.0;
  std::size_t counted = 0;
  for (std::size_t j = 0; j < h.cols(); ++j) {
    const Vector col = h.column(j);
    const double base = norm(col);
    if (base == 0.0) continue;
    acc += norm(steer_displacement(col, artifact, lambda)) / base;
    ++counted;
  }
  return counted == 0 ? 0.0 : acc / static_cast<double>(counted);
}

double mean_alignment(const Matrix& h, const Matrix& targets, const SteeringArtifact& artifact,
                      double lambda) {
  if (targets.rows() != h.rows() || targets.cols() != h.cols())
    throw ShapeError("mean_alignment: targets must match the activations");
  if (h.cols() == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < h.cols(); ++j) {
    const Vector disp = steer_displacement(h.column(j), artifact, lambda);
    const Vector target = targets.column(j);
    const double denom = norm(disp) * norm(target);
    if (denom > 0.0) acc += dot(disp, target) / denom;
  }
  return acc / static_cast<double>(h.cols());
}

double mean_displacement_norm(const Matrix& h, const SteeringArtifact& artifact, double lambda) {
  if (h.cols() == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < h.cols(); ++j)
    acc += norm(steer_displacement(h.column(j), artifact, lambda));
  return acc / static_cast<double>(h.cols());
}

EvalReport evaluate(const SteeringArtifact& artifact, const EvalData& data, double lambda) {
  EvalReport r;
  r.lambda = lambda;
  r.retained_rank = artifact.projector.retained_rank;
  r.benign_drift_rel = mean_relative_drift(data.benign_holdout, artifact, lambda);
  r.fit_benign_drift_rel = mean_relative_drift(data.benign, artifact, lambda);
  r.malicious_alignment =
      mean_alignment(data.malicious_holdout, data.refusal_holdout, artifact, lambda);
  r.probe_rate_pre_benign = harm_probe_rate(data.benign_holdout, data.probe);
  r.probe_rate_post_benign =
      harm_probe_rate(steer_batch(data.benign_holdout, artifact, lambda), data.probe);
  r.probe_rate_pre_malicious = harm_probe_rate(data.malicious_holdout, data.probe);
  r.probe_rate_post_malicious =
      harm_probe_rate(steer_batch(data.malicious_holdout, artifact, lambda), data.probe);

  const Matrix attribution = attribution_deltas(data.malicious, data.masked);
  const Matrix& p = artifact.projector.p;
  r.objective_terms =
      objective_value(artifact.delta, data.malicious, data.refusal, attribution, p,
                      artifact.alpha, artifact.beta);
  Matrix scratch;
  r.normal_residual = normal_equation_residual(
      artifact.delta, data.malicious, zeros_like_or(data.refusal, artifact.refusal_target, scratch),
      attribution, p, artifact.alpha, artifact.beta);
  r.benign_annihilation = benign_annihilation(artifact, data.benign);

  if (data.refusal_states && data.compliance_states) {
    const RefusalDirection dir =
        refusal_direction(*data.refusal_states, *data.compliance_states, artifact.layer_tag);
    double drift = 0.0;
    std::size_t counted = 0;
    Matrix moved(data.malicious_holdout.rows(), data.malicious_holdout.cols());
    for (std::size_t j = 0; j < data.benign_holdout.cols(); ++j) {
      const Vector h = data.benign_holdout.column(j);
      const double base = norm(h);
      if (base == 0.0) continue;
      drift += std::abs(lambda) * norm(dir.direction) / base;
      ++counted;
    }
    for (std::size_t j = 0; j < moved.cols(); ++j)
      moved.set_column(j, additive_steer(data.malicious_holdout.column(j), dir, lambda));
    r.additive_benign_drift_rel = counted == 0 ? 0.0 : drift / static_cast<double>(counted);
    r.additive_probe_rate_post_malicious = harm_probe_rate(moved, data.probe);
  }

  const double d = static_cast<double>(artifact.dim());
  if (frobenius_norm(subtract(p, transpose(p))) > 1e-10 * d)
    r.failed_invariants.push_back("projector symmetry");
  if (frobenius_norm(subtract(matmul(p, p), p)) > 1e-8 * d)
    r.failed_invariants.push_back("projector idempotence");
  if (r.benign_annihilation > 1e-5) r.failed_invariants.push_back("benign annihilation");
  if (r.normal_residual > 1e-6) r.failed_invariants.push_back("normal equation residual");
  if (r.fit_benign_drift_rel > 1e-6) r.failed_invariants.push_back("fit-set benign drift");
  r.invariant_suite_pass = r.failed_invariants.empty();
  return r;
}

std::vector<SweepRow> sweep_lambda(const SteeringArtifact& artifact, const EvalData& data,
                                   const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidInputError("lambda grid is empty");
  std::vector<SweepRow> rows;
  for (double lambda : grid) rows.push_back(row_for("lambda", lambda, artifact, data, lambda));
  return rows;
}

std::vector<SweepRow> sweep_benign_count(const EvalData& data, const SolverConfig& cfg,
                                         const std::vector<std::size_t>& grid, double lambda) {
  if (grid.empty()) throw InvalidInputError("N_b grid is empty");
  std::vector<SweepRow> rows;
  for (std::size_t n : grid) {
    if (n > data.benign.cols())
      throw InvalidInputError("N_b grid value " + std::to_string(n) + " exceeds available benign samples");
    const FitResult fit =
        fit_transform(data.benign.columns(0, n), data.malicious, data.masked, data.refusal, cfg);
    rows.push_back(row_for("n_b", static_cast<double>(n), fit.artifact, data, lambda));
  }
  return rows;
}

std::vector<SweepRow> sweep_malicious_count(const EvalData& data, const SolverConfig& cfg,
                                            const std::vector<std::size_t>& grid, double lambda) {
  if (grid.empty()) throw InvalidInputError("N_m grid is empty");
  std::vector<SweepRow> rows;
  for (std::size_t n : grid) {
    if (n == 0 || n > data.malicious.cols())
      throw InvalidInputError("N_m grid value " + std::to_string(n) + " is out of range");
    const FitResult fit = fit_transform(data.benign, data.malicious.columns(0, n),
                                        data.masked.columns(0, n), data.refusal.columns(0, n), cfg);
    rows.push_back(row_for("n_m", static_cast<double>(n), fit.artifact, data, lambda));
  }
  return rows;
}

std::vector<std::string> trend_summary(const std::vector<SweepRow>& rows) {
  auto series = [&](const std::string& sweep) {
    std::vector<const SweepRow*> out;
    for (const auto& r : rows)
      if (r.sweep == sweep) out.push_back(&r);
    return out;
  };
  auto non_decreasing = [](const std::vector<const SweepRow*>& s, auto field) {
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i]->*field < s[i - 1]->*field) return false;
    return true;
  };
  auto verdict = [](bool ok) { return ok ? std::string("non-decreasing") : std::string("NOT monotone"); };

  std::vector<std::string> out;
  if (const auto s = series("lambda"); s.size() > 1) {
    out.push_back("drift vs lambda: " + verdict(non_decreasing(s, &SweepRow::benign_drift_rel)));
    out.push_back("displacement vs lambda: " +
                  verdict(non_decreasing(s, &SweepRow::displacement_norm)));
    out.push_back("alignment vs lambda: " +
                  verdict(non_decreasing(s, &SweepRow::malicious_alignment)));
  }
  if (const auto s = series("n_m"); s.size() > 1) {
    out.push_back("alignment vs N_m: " + verdict(non_decreasing(s, &SweepRow::malicious_alignment)) +
                  ", last step " + fmt(s.back()->malicious_alignment - s[s.size() - 2]->malicious_alignment) +
                  " vs first step " + fmt(s[1]->malicious_alignment - s[0]->malicious_alignment));
  }
  if (const auto s = series("n_b"); s.size() > 1) {
    bool rank_non_increasing = true;
    for (std::size_t i = 1; i < s.size(); ++i)
      rank_non_increasing = rank_non_increasing && s[i]->retained_rank <= s[i - 1]->retained_rank;
    out.push_back(std::string("retained rank vs N_b: ") +
                  (rank_non_increasing ? "non-increasing" : "NOT monotone") + ", from " +
                  std::to_string(s.front()->retained_rank) + " to " +
                  std::to_string(s.back()->retained_rank));
  }
  return out;
}

std::string render_report(const EvalReport& r) {
  std::ostringstream os;
  os << "lambda = " << fmt(r.lambda) << "\n"
     << "retained_rank = " << r.retained_rank << "\n"
     << "benign_drift_rel = " << fmt(r.benign_drift_rel) << "\n"
     << "fit_benign_drift_rel = " << fmt(r.fit_benign_drift_rel) << "\n"
     << "malicious_alignment = " << fmt(r.malicious_alignment) << "\n"
     << "probe_rate_pre_benign = " << fmt(r.probe_rate_pre_benign) << "\n"
     << "probe_rate_post_benign = " << fmt(r.probe_rate_post_benign) << "\n"
     << "probe_rate_pre_malicious = " << fmt(r.probe_rate_pre_malicious) << "\n"
     << "probe_rate_post_malicious = " << fmt(r.probe_rate_post_malicious) << "\n"
     << "objective_refusal_fit = " << fmt(r.objective_terms.refusal_fit) << "\n"
     << "objective_smoothness = " << fmt(r.objective_terms.smoothness) << "\n"
     << "objective_attribution_fit = " << fmt(r.objective_terms.attribution_fit) << "\n"
     << "objective_literal = " << fmt(r.objective_terms.literal) << "\n"
     << "objective_compact = " << fmt(r.objective_terms.compact) << "\n";
  if (r.additive_benign_drift_rel) {
    os << "additive_benign_drift_rel = " << fmt(*r.additive_benign_drift_rel) << "\n"
       << "additive_probe_rate_post_malicious = " << fmt(*r.additive_probe_rate_post_malicious)
       << "\n";
  }
  os << "normal_residual = " << fmt(r.normal_residual) << "\n"
     << "benign_annihilation = " << fmt(r.benign_annihilation) << "\n"
     << "invariant_suite_pass = " << (r.invariant_suite_pass ? "true" : "false") << "\n";
  for (const auto& f : r.failed_invariants) os << "failed_invariant = " << f << "\n";

  nlohmann::ordered_json j;
  j["lambda"] = r.lambda;
  j["retained_rank"] = r.retained_rank;
  j["benign_drift_rel"] = r.benign_drift_rel;
  j["fit_benign_drift_rel"] = r.fit_benign_drift_rel;
  j["malicious_alignment"] = r.malicious_alignment;
  j["probe_rate_pre"] = {{"benign", r.probe_rate_pre_benign},
                         {"malicious", r.probe_rate_pre_malicious}};
  j["probe_rate_post"] = {{"benign", r.probe_rate_post_benign},
                          {"malicious", r.probe_rate_post_malicious}};
  j["objective_terms"] = {{"refusal_fit", r.objective_terms.refusal_fit},
                          {"smoothness", r.objective_terms.smoothness},
                          {"attribution_fit", r.objective_terms.attribution_fit},
                          {"literal", r.objective_terms.literal},
                          {"compact", r.objective_terms.compact}};
  if (r.additive_benign_drift_rel) {
    j["additive_baseline"] = {{"benign_drift_rel", *r.additive_benign_drift_rel},
                              {"probe_rate_post_malicious", *r.additive_probe_rate_post_malicious}};
  }
  j["normal_residual"] = r.normal_residual;
  j["benign_annihilation"] = r.benign_annihilation;
  j["invariant_suite_pass"] = r.invariant_suite_pass;
  j["failed_invariants"] = r.failed_invariants;
  os << "--- json ---\n" << j.dump(2) << "\n";
  return os.str();
}

std::string render_sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "sweep\tvalue\tretained_rank\tbenign_drift_rel\tmalicious_alignment\tdisplacement_norm"
        "\tprobe_rate_post_benign\tprobe_rate_post_malicious\n";
  for (const auto& r : rows) {
    os << r.sweep << '\t' << fmt(r.value) << '\t' << r.retained_rank << '\t'
       << fmt(r.benign_drift_rel) << '\t' << fmt(r.malicious_alignment) << '\t'
       << fmt(r.displacement_norm) << '\t' << fmt(r.probe_rate_post_benign) << '\t'
       << fmt(r.probe_rate_post_malicious) << '\n';
  }
  return os.str();
}

}  // namespace nss
