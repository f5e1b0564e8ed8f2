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

#ifndef NSS_EVALUATION_HPP_
#define NSS_EVALUATION_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nss/matrix.hpp"
#include "nss/steering.hpp"
#include "nss/synthdata.hpp"

namespace nss {

struct FitResult {
  SteeringArtifact artifact;
  double normal_residual = 0.0;      // relative, see normal_equation_residual
  double benign_annihilation = 0.0;  // relative, see benign_annihilation
};

// Projector from `benign`, attribution deltas from (malicious, masked), then
// the closed-form solve. Provenance is left zero.
FitResult fit_transform(const Matrix& benign, const Matrix& malicious, const Matrix& masked,
                        const Matrix& refusal, const SolverConfig& cfg);

// Everything an evaluation reads. The fit-set matrices are the ones the
// artifact was solved on; the held-out ones are drawn from the same
// distributions.
struct EvalData {
  Matrix benign;
  Matrix malicious;
  Matrix masked;
  Matrix refusal;
  Matrix benign_holdout;
  Matrix malicious_holdout;
  Matrix refusal_holdout;
  HarmProbe probe;
  // D_r / D_c for the additive baseline. Optional.
  std::optional<Matrix> refusal_states;
  std::optional<Matrix> compliance_states;
};

EvalData eval_data_from(const SynthDataset& ds);

struct EvalReport {
  double lambda = 0.0;
  std::size_t retained_rank = 0;
  double benign_drift_rel = 0.0;      // held-out benign
  double fit_benign_drift_rel = 0.0;  // benign columns used to build P
  double malicious_alignment = 0.0;   // held-out malicious vs refusal targets
  double probe_rate_pre_benign = 0.0;
  double probe_rate_post_benign = 0.0;
  double probe_rate_pre_malicious = 0.0;
  double probe_rate_post_malicious = 0.0;
  ObjectiveTerms objective_terms;     // on the fit set
  std::optional<double> additive_benign_drift_rel;
  std::optional<double> additive_probe_rate_post_malicious;
  double normal_residual = 0.0;
  double benign_annihilation = 0.0;
  bool invariant_suite_pass = false;
  std::vector<std::string> failed_invariants;
};

// Mean of ||lambda delta P h|| / ||h|| over columns; zero-norm columns skipped.
double mean_relative_drift(const Matrix& h, const SteeringArtifact& artifact, double lambda);
// Mean cosine between each column's displacement and the matching target
// column. A zero displacement or target contributes 0.
double mean_alignment(const Matrix& h, const Matrix& targets, const SteeringArtifact& artifact,
                      double lambda);
double mean_displacement_norm(const Matrix& h, const SteeringArtifact& artifact, double lambda);

EvalReport evaluate(const SteeringArtifact& artifact, const EvalData& data, double lambda);

struct SweepRow {
  std::string sweep;  // "lambda", "n_b" or "n_m"
  double value = 0.0;
  std::size_t retained_rank = 0;
  double benign_drift_rel = 0.0;
  double malicious_alignment = 0.0;
  double displacement_norm = 0.0;
  double probe_rate_post_benign = 0.0;
  double probe_rate_post_malicious = 0.0;
};

std::vector<SweepRow> sweep_lambda(const SteeringArtifact& artifact, const EvalData& data,
                                   const std::vector<double>& grid);
// Refits with the first n benign columns for each n, steering at `lambda`.
std::vector<SweepRow> sweep_benign_count(const EvalData& data, const SolverConfig& cfg,
                                         const std::vector<std::size_t>& grid, double lambda);
// Refits with the first n malicious columns (and matching targets).
std::vector<SweepRow> sweep_malicious_count(const EvalData& data, const SolverConfig& cfg,
                                            const std::vector<std::size_t>& grid, double lambda);

// One line per monotone-trend check (drift vs lambda, alignment vs N_m, ...).
std::vector<std::string> trend_summary(const std::vector<SweepRow>& rows);

std::string render_report(const EvalReport& report);
std::string render_sweep_table(const std::vector<SweepRow>& rows);

}  // namespace nss

#endif  // NSS_EVALUATION_HPP_
