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

// Command-line front end: gen -> fit -> apply -> eval, plus verify.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nss/bundle_io.hpp"
#include "nss/error.hpp"
#include "nss/evaluation.hpp"
#include "nss/linalg.hpp"
#include "nss/sha256.hpp"
#include "nss/steering.hpp"
#include "nss/synthdata.hpp"
#include "nss/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kOutputDirEnv = "NSS_OUTPUT_DIR";

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerifyFailed = 2;

fs::path default_output_dir() {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return "nss_out";
}

// File names written by `gen` and read back by `fit` and `eval`.
struct DataLayout {
  fs::path dir;
  fs::path file(const std::string& name) const { return dir / (name + ".nsab"); }
  fs::path manifest() const { return dir / "manifest.json"; }
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw nss::IoError("cannot write " + path.string());
  out << text;
  if (!out) throw nss::IoError("write failed for " + path.string());
}

ordered_json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw nss::IoError("cannot open " + path.string());
  return ordered_json::parse(in);
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw nss::InvalidInputError("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& csv) {
  std::vector<std::size_t> out;
  for (double v : parse_doubles(csv)) {
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw nss::InvalidInputError("grid values must be non-negative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// Flags shared by fit and eval.
struct SolverFlags {
  double alpha = 1.0;
  double beta = 0.1;
  std::string mode = "relative";
  double epsilon = 1e-8;
  std::size_t r = 0;
  std::optional<double> pinv_tol;
  std::uint64_t seed = 0;
  double lambda_default = 5.0;
  bool refusal_free = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "Smoothness weight (> 0)")->capture_default_str();
    cmd->add_option("--beta", beta, "Attribution-term weight (>= 0)")->capture_default_str();
    cmd->add_option("--mode", mode, "Rank policy: relative, absolute or fixed")
        ->capture_default_str();
    cmd->add_option("--epsilon", epsilon, "Near-zero eigenvalue threshold")->capture_default_str();
    cmd->add_option("-r,--r,--rank", r, "Retained rank for --mode fixed")->capture_default_str();
    cmd->add_option("--pinv-tol", pinv_tol, "Relative pseudoinverse cutoff (default 1e-12*d)");
    cmd->add_option("--seed", seed, "Determinism seed recorded with the solve")
        ->capture_default_str();
    cmd->add_option("--lambda-default", lambda_default, "Default steering strength")
        ->capture_default_str();
    cmd->add_flag("--refusal-free", refusal_free, "Drop the refusal target (ablation)");
  }

  nss::SolverConfig config(int layer_tag) const {
    nss::SolverConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.rank_policy.mode = nss::parse_rank_mode(mode);
    cfg.rank_policy.epsilon = epsilon;
    cfg.rank_policy.r = r;
    cfg.pinv_tol = pinv_tol;
    cfg.seed = seed;
    cfg.lambda_default = lambda_default;
    cfg.use_refusal_target = !refusal_free;
    cfg.layer_tag = layer_tag;
    cfg.validate();
    return cfg;
  }
};

// ---------------------------------------------------------------- gen

int run_gen(const nss::SynthConfig& cfg, const fs::path& out_dir) {
  const nss::SynthDataset ds = nss::gen_dataset(cfg);
  const DataLayout layout{out_dir};
  fs::create_directories(out_dir);

  ordered_json bundles = ordered_json::object();
  auto emit = [&](const std::string& name, nss::Role role, const nss::Matrix& m) {
    nss::ActivationBundle b{role, cfg.layer_tag, static_cast<std::int64_t>(cfg.seed), m};
    const nss::Sha256Digest digest = nss::write_bundle(layout.file(name), b);
    bundles[name] = {{"file", layout.file(name).filename().string()},
                     {"sha256", nss::to_hex(digest)},
                     {"role", nss::to_string(role)},
                     {"d", m.rows()},
                     {"n", m.cols()}};
  };
  emit("benign", nss::Role::kBenign, ds.benign);
  emit("malicious", nss::Role::kMalicious, ds.malicious);
  emit("masked", nss::Role::kMasked, ds.malicious_masked);
  emit("refusal", nss::Role::kRefusal, ds.refusal);
  emit("refusal_states", nss::Role::kRefusal, ds.refusal_states);
  emit("compliance_states", nss::Role::kGeneric, ds.compliance_states);
  emit("benign_holdout", nss::Role::kBenign, ds.benign_holdout);
  emit("malicious_holdout", nss::Role::kMalicious, ds.malicious_holdout);
  emit("malicious_holdout_masked", nss::Role::kMasked, ds.malicious_holdout_masked);
  emit("refusal_holdout", nss::Role::kRefusal, ds.refusal_holdout);

  ordered_json manifest;
  manifest["format"] = "nss-manifest";
  manifest["version"] = 1;
  manifest["config"] = {{"seed", cfg.seed},
                        {"d", cfg.d},
                        {"k_benign", cfg.k_benign},
                        {"n_benign", cfg.n_benign},
                        {"n_malicious", cfg.n_malicious},
                        {"n_refusal", cfg.n_refusal},
                        {"cluster_separation", cfg.cluster_separation},
                        {"subspace_noise", cfg.subspace_noise},
                        {"n_holdout", cfg.n_holdout},
                        {"layer_tag", cfg.layer_tag}};
  manifest["bundles"] = bundles;
  manifest["probe"] = {{"w", ds.probe.w}, {"b", ds.probe.b}};
  manifest["effective_separation"] = ds.effective_separation;
  manifest["attempts"] = ds.attempts;
  write_text(layout.manifest(), manifest.dump(2) + "\n");

  std::cout << "wrote " << bundles.size() << " bundles to " << out_dir.string() << "\n"
            << "probe rate (malicious) = " << nss::harm_probe_rate(ds.malicious, ds.probe) << "\n"
            << "probe rate (benign)    = " << nss::harm_probe_rate(ds.benign, ds.probe) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitPaths {
  fs::path benign, malicious, masked, refusal;
};

struct LoadedFitInputs {
  nss::ActivationBundle benign, malicious, masked, refusal;
  nss::Provenance provenance;
};

LoadedFitInputs load_fit_inputs(const FitPaths& paths) {
  LoadedFitInputs in;
  in.benign = nss::read_bundle(paths.benign);
  in.malicious = nss::read_bundle(paths.malicious);
  in.masked = nss::read_bundle(paths.masked);
  in.refusal = nss::read_bundle(paths.refusal);
  in.provenance.benign = nss::sha256_file(paths.benign);
  in.provenance.malicious = nss::sha256_file(paths.malicious);
  in.provenance.masked = nss::sha256_file(paths.masked);
  in.provenance.refusal = nss::sha256_file(paths.refusal);
  const std::size_t d = in.benign.data.rows();
  for (const auto* b : {&in.malicious, &in.masked, &in.refusal}) {
    if (b->data.rows() != d)
      throw nss::ShapeError("bundles disagree on the activation dimension");
  }
  return in;
}

int run_fit(const FitPaths& paths, const SolverFlags& flags, const fs::path& out) {
  const LoadedFitInputs in = load_fit_inputs(paths);
  if (in.benign.layer_tag != in.malicious.layer_tag)
    std::cerr << "warning: benign and malicious bundles carry different layer tags\n";
  const nss::SolverConfig cfg = flags.config(in.malicious.layer_tag);
  nss::FitResult fit = nss::fit_transform(in.benign.data, in.malicious.data, in.masked.data,
                                          in.refusal.data, cfg);
  fit.artifact.provenance = in.provenance;
  const nss::Sha256Digest digest = nss::write_artifact(out, fit.artifact);

  for (const auto& diag : fit.artifact.projector.diagnostics) std::cerr << "note: " << diag << "\n";
  if (fit.artifact.projector.degenerate()) {
    std::cerr << "\n"
              << "!!! WARNING: DEGENERATE NULL SPACE (retained_rank = 0)\n"
              << "!!! The benign activations span all " << fit.artifact.dim()
              << " dimensions, so the projector is zero\n"
              << "!!! and the fitted transform cannot change any activation.\n\n";
  }
  std::cout << "artifact = " << out.string() << "\n"
            << "sha256 = " << nss::to_hex(digest) << "\n"
            << "d = " << fit.artifact.dim() << "\n"
            << "retained_rank = " << fit.artifact.projector.retained_rank << "\n"
            << "normal_equation_residual = " << fit.normal_residual << "\n"
            << "benign_annihilation = " << fit.benign_annihilation << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- apply

int run_apply(const fs::path& artifact_path, const fs::path& input, std::optional<double> lambda,
              const fs::path& out) {
  const nss::SteeringArtifact artifact = nss::read_artifact(artifact_path);
  const nss::ActivationBundle bundle = nss::read_bundle(input);
  if (bundle.data.rows() != artifact.dim())
    throw nss::ShapeError("bundle dimension " + std::to_string(bundle.data.rows()) +
                          " does not match artifact dimension " + std::to_string(artifact.dim()));
  const double strength = lambda.value_or(artifact.lambda_default);

  nss::ActivationBundle steered = bundle;
  steered.data = nss::steer_batch(bundle.data, artifact, strength);
  const nss::Sha256Digest digest = nss::write_bundle(out, steered);

  ordered_json manifest;
  manifest["steered"] = true;
  manifest["lambda"] = strength;
  manifest["role"] = nss::to_string(steered.role);
  manifest["artifact_sha256"] = nss::to_hex(nss::sha256_file(artifact_path));
  manifest["input_sha256"] = nss::to_hex(nss::sha256_file(input));
  manifest["output_sha256"] = nss::to_hex(digest);
  write_text(out.string() + ".manifest.json", manifest.dump(2) + "\n");

  std::cout << "steered " << steered.data.cols() << " columns at lambda = " << strength << " -> "
            << out.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

nss::EvalData load_eval_data(const fs::path& dir) {
  const DataLayout layout{dir};
  const ordered_json manifest = read_json(layout.manifest());
  nss::EvalData data;
  data.benign = nss::read_bundle(layout.file("benign")).data;
  data.malicious = nss::read_bundle(layout.file("malicious")).data;
  data.masked = nss::read_bundle(layout.file("masked")).data;
  data.refusal = nss::read_bundle(layout.file("refusal")).data;
  data.benign_holdout = nss::read_bundle(layout.file("benign_holdout")).data;
  data.malicious_holdout = nss::read_bundle(layout.file("malicious_holdout")).data;
  data.refusal_holdout = nss::read_bundle(layout.file("refusal_holdout")).data;
  if (fs::exists(layout.file("refusal_states")) && fs::exists(layout.file("compliance_states"))) {
    data.refusal_states = nss::read_bundle(layout.file("refusal_states")).data;
    data.compliance_states = nss::read_bundle(layout.file("compliance_states")).data;
  }
  data.probe.w = manifest.at("probe").at("w").get<std::vector<double>>();
  data.probe.b = manifest.at("probe").at("b").get<double>();
  return data;
}

struct EvalArgs {
  fs::path artifact;
  fs::path data;
  std::optional<double> lambda;
  std::string lambda_grid = "0,1,2,3,4,5,6,8,10";
  std::string nb_grid = "1,2,4,8,16,32,64,128,200";
  std::string nm_grid = "8,16,32,64,96";
  fs::path report;
  fs::path table;
};

int run_eval(const EvalArgs& args, const SolverFlags& flags) {
  const nss::SteeringArtifact artifact = nss::read_artifact(args.artifact);
  const nss::EvalData data = load_eval_data(args.data);
  if (data.benign.rows() != artifact.dim())
    throw nss::ShapeError("evaluation data dimension does not match the artifact");
  const double lambda = args.lambda.value_or(artifact.lambda_default);

  const nss::EvalReport report = nss::evaluate(artifact, data, lambda);

  // Refits reuse the artifact's own weights; only the rank policy comes from flags.
  nss::SolverConfig cfg = flags.config(artifact.layer_tag);
  cfg.alpha = artifact.alpha;
  cfg.beta = artifact.beta;
  cfg.use_refusal_target = artifact.refusal_target;

  std::vector<nss::SweepRow> rows = nss::sweep_lambda(artifact, data, parse_doubles(args.lambda_grid));
  const auto nb = nss::sweep_benign_count(data, cfg, parse_counts(args.nb_grid), lambda);
  const auto nm = nss::sweep_malicious_count(data, cfg, parse_counts(args.nm_grid), lambda);
  rows.insert(rows.end(), nb.begin(), nb.end());
  rows.insert(rows.end(), nm.begin(), nm.end());

  const std::string text = nss::render_report(report);
  const std::string table = nss::render_sweep_table(rows);
  write_text(args.report, text);
  write_text(args.table, table);

  std::cout << text << "\n";
  for (const auto& line : nss::trend_summary(rows)) std::cout << "trend: " << line << "\n";
  std::cout << "report = " << args.report.string() << "\ntable = " << args.table.string() << "\n";
  return report.invariant_suite_pass ? kExitOk : kExitVerifyFailed;
}

// ---------------------------------------------------------------- verify

int run_verify(std::size_t seed_count, std::uint64_t base_seed,
               const std::optional<fs::path>& artifact_path, const std::optional<fs::path>& data) {
  bool ok = true;
  if (artifact_path) {
    try {
      const nss::SteeringArtifact artifact = nss::read_artifact(*artifact_path);
      std::cout << "artifact " << artifact_path->string() << ": structure and projector checks pass\n";
      if (data) {
        const DataLayout layout{*data};
        const std::pair<const char*, const nss::Sha256Digest*> inputs[] = {
            {"benign", &artifact.provenance.benign},
            {"malicious", &artifact.provenance.malicious},
            {"masked", &artifact.provenance.masked},
            {"refusal", &artifact.provenance.refusal}};
        for (const auto& [name, digest] : inputs) {
          if (std::string(name) == "refusal" && !artifact.refusal_target) continue;
          const bool match = nss::sha256_file(layout.file(name)) == *digest;
          std::cout << "provenance " << name << ": " << (match ? "match" : "MISMATCH") << "\n";
          ok = ok && match;
        }
      }
    } catch (const nss::CorruptArtifactError& e) {
      std::cerr << "corrupt artifact: " << e.what() << "\n";
      return kExitVerifyFailed;
    }
  }
  const nss::VerifyReport report = nss::run_invariant_suite(seed_count, base_seed);
  std::cout << nss::render_verify_report(report);
  ok = ok && report.all_pass();
  return ok ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Null-space constrained activation steering"};
  app.require_subcommand(1);
  const fs::path out_dir = default_output_dir();

  // gen
  nss::SynthConfig synth;
  fs::path gen_out = out_dir;
  auto* gen = app.add_subcommand("gen", "Generate seeded synthetic activation bundles");
  gen->add_option("--seed", synth.seed)->capture_default_str();
  gen->add_option("--d", synth.d, "Ambient dimension")->capture_default_str();
  gen->add_option("--k-benign", synth.k_benign, "Intrinsic benign dimension")->capture_default_str();
  gen->add_option("--n-benign", synth.n_benign)->capture_default_str();
  gen->add_option("--n-malicious", synth.n_malicious)->capture_default_str();
  gen->add_option("--n-refusal", synth.n_refusal)->capture_default_str();
  gen->add_option("--cluster-separation", synth.cluster_separation)->capture_default_str();
  gen->add_option("--subspace-noise", synth.subspace_noise)->capture_default_str();
  gen->add_option("--n-holdout", synth.n_holdout)->capture_default_str();
  gen->add_option("--layer-tag", synth.layer_tag)->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory (default $NSS_OUTPUT_DIR or nss_out)");

  // fit
  fs::path fit_data = out_dir;
  FitPaths fit_paths;
  SolverFlags fit_flags;
  fs::path fit_out;
  auto* fit = app.add_subcommand("fit", "Solve the steering transform from bundles");
  fit->add_option("--data", fit_data, "Directory holding benign/malicious/masked/refusal bundles");
  fit->add_option("--benign", fit_paths.benign);
  fit->add_option("--malicious", fit_paths.malicious);
  fit->add_option("--masked", fit_paths.masked);
  fit->add_option("--refusal", fit_paths.refusal);
  fit->add_option("--out", fit_out, "Artifact path (default <data>/artifact.nssa)");
  fit_flags.add_to(fit);

  // apply
  fs::path apply_artifact, apply_input, apply_out;
  std::optional<double> apply_lambda;
  auto* apply = app.add_subcommand("apply", "Steer every column of a bundle");
  apply->add_option("--artifact", apply_artifact)->required();
  apply->add_option("--input", apply_input)->required();
  apply->add_option("--lambda", apply_lambda, "Steering strength (default: artifact's)");
  apply->add_option("--out", apply_out)->required();

  // eval
  EvalArgs eval_args;
  SolverFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Evaluate an artifact and run the lambda/N_b/N_m sweeps");
  eval->add_option("--artifact", eval_args.artifact)->required();
  eval->add_option("--data", eval_args.data, "Directory written by gen")->required();
  eval->add_option("--lambda", eval_args.lambda, "Strength for the report and count sweeps");
  eval->add_option("--lambda-grid", eval_args.lambda_grid)->capture_default_str();
  eval->add_option("--nb-grid", eval_args.nb_grid)->capture_default_str();
  eval->add_option("--nm-grid", eval_args.nm_grid)->capture_default_str();
  eval->add_option("--report", eval_args.report, "Report path (default <data>/report.txt)");
  eval->add_option("--table", eval_args.table, "Sweep table path (default <data>/sweep.tsv)");
  eval->add_option("--mode", eval_flags.mode, "Rank policy for sweep refits")->capture_default_str();
  eval->add_option("--epsilon", eval_flags.epsilon)->capture_default_str();
  eval->add_option("-r,--r,--rank", eval_flags.r)->capture_default_str();

  // verify
  std::size_t seed_count = 1;
  std::uint64_t base_seed = 0;
  std::optional<fs::path> verify_artifact;
  std::optional<fs::path> verify_data;
  auto* verify = app.add_subcommand("verify", "Run the invariant suite over random instances");
  verify->add_option("--seed-count", seed_count)->capture_default_str()->check(CLI::PositiveNumber);
  verify->add_option("--base-seed", base_seed)->capture_default_str();
  verify->add_option("--artifact", verify_artifact, "Also validate this artifact file");
  verify->add_option("--data", verify_data, "Check artifact provenance against this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_gen(synth, gen_out);
    if (*fit) {
      const DataLayout layout{fit_data};
      if (fit_paths.benign.empty()) fit_paths.benign = layout.file("benign");
      if (fit_paths.malicious.empty()) fit_paths.malicious = layout.file("malicious");
      if (fit_paths.masked.empty()) fit_paths.masked = layout.file("masked");
      if (fit_paths.refusal.empty()) fit_paths.refusal = layout.file("refusal");
      if (fit_out.empty()) fit_out = fit_data / "artifact.nssa";
      return run_fit(fit_paths, fit_flags, fit_out);
    }
    if (*apply) return run_apply(apply_artifact, apply_input, apply_lambda, apply_out);
    if (*eval) {
      if (eval_args.report.empty()) eval_args.report = eval_args.data / "report.txt";
      if (eval_args.table.empty()) eval_args.table = eval_args.data / "sweep.tsv";
      return run_eval(eval_args, eval_flags);
    }
    if (*verify) return run_verify(seed_count, base_seed, verify_artifact, verify_data);
  } catch (const nss::CorruptArtifactError& e) {
    std::cerr << "corrupt artifact: " << e.what() << "\n";
    return kExitVerifyFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
