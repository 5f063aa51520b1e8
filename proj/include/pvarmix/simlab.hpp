#pragma once

#include "pvarmix/distributions.hpp"
#include "pvarmix/draw_store.hpp"
#include "pvarmix/panel.hpp"
#include "pvarmix/sampler.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace pvarmix {

struct DgpSpec {
  int N = 26;
  int M = 2;
  int P = 1;
  int T = 80;
  // Cluster centers in the internal layout (per equation: intercept, then
  // lags). Written per equation as (own-country lags..., intercept) the
  // defaults are (0.6, 0.2, 2.0 | 0.3, 0.6, -3.0) and (-0.6, 0.2, 5 | -0.8, 0.6, 0).
  std::vector<Eigen::VectorXd> mu_true;
  Eigen::VectorXd w_true;
  double v_true = 1e-3;
  double b_var = 1e-2;
  double sparsity = 0.3;
  int q = 2;
  SVParams sv_h{0.0, 0.9, 0.1};
  SVParams sv_omega{-10.0, 0.9, 0.01};
  double loading_var = 1e-6;
  int burnin = 100;       // periods simulated and discarded before the sample
  bool zero_shocks = false;
  int replications = 50;
  std::uint64_t seed = 1;

  DgpSpec();
  // N=10 and 10 replications; everything else as above.
  static DgpSpec desk();
  int G_true() const { return static_cast<int>(mu_true.size()); }
  void validate() const;
};

struct DgpTruth {
  ParameterState state;        // C, B, L, paths and SV parameters (paths cover T - P rows)
  Eigen::MatrixXd A;           // K x (1 + K P)
  std::vector<int> delta;      // 0-based true component per country
  Eigen::MatrixXd mu;          // m x G_true
  Eigen::VectorXd w;
  int redraws = 0;             // foreign-block redraws needed for stationarity
};

std::pair<PanelData, DgpTruth> generate_dgp(const DgpSpec& spec, RngStream& rng);

// Entries with |b| < varpi * max|b| (one threshold over the whole matrix) become 0.
Eigen::MatrixXd sparsify(const Eigen::MatrixXd& B, double varpi);
// Same threshold applied jointly across all countries' foreign blocks.
void sparsify_blocks(std::vector<Eigen::MatrixXd>& B, double varpi);

// Largest modulus among the eigenvalues of the VAR companion matrix.
double companion_radius(const Eigen::MatrixXd& A, int P);

// Equation-by-equation least squares, K x (1 + K P).
Eigen::MatrixXd fit_var_ols(const PanelData& panel, int P);

// Large VAR with one global NG scale per lag and the same factor-SV errors.
DrawStore fit_var_ng(const PanelData& panel, ModelConfig cfg, const RunOptions& opts = {});

// Per-series AR(1) with stochastic volatility; no factors.
DrawStore fit_ar1_sv(const PanelData& panel, const ModelConfig& cfg, const RunOptions& opts = {});

double coefficient_rmse(const DrawStore& store, const Eigen::MatrixXd& A_true);
double coefficient_rmse(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& A_true);

enum class Estimator { pvar_mix, pvar_g1, var_ng, var_ols };
const char* estimator_name(Estimator e);
Estimator parse_estimator(const std::string& s);

// Posterior summaries of a mixture fit against the generating truth.
struct MixtureDiagnostics {
  double qps = 0.0;
  std::vector<double> gstar_prob;      // Pr(G* = g), index g - 1
  int gstar_mode = 0;
  std::vector<double> alloc_prob;      // per country, Pr(label = true label)
  Eigen::VectorXd delta_mean;          // identified labels, 0-based
  Eigen::VectorXd log_lambda_median;   // per coordinate
  std::vector<double> inefficiency;    // domestic coefficient chains
};

MixtureDiagnostics mixture_diagnostics(const DrawStore& store, const std::vector<int>& delta_true,
                                       const Eigen::MatrixXd& mu_true, const Eigen::VectorXd& w_true,
                                       IdentScheme scheme, int coord);

struct ExperimentPlan {
  std::vector<int> T_grid{80};
  std::vector<double> sparsity_grid{0.3};
  std::vector<Estimator> estimators{Estimator::pvar_mix, Estimator::pvar_g1, Estimator::var_ng, Estimator::var_ols};
  int replications = 10;
  int threads = 1;
  ModelConfig model;  // G taken from here for pvar_mix
};

struct ExperimentRow {
  std::string estimator;
  int T = 0;
  double sparsity = 0.0;
  int replication = 0;
  double rmse = 0.0;
  double qps = -1.0;  // mixture estimators only
  std::string error;  // non-empty when the replication failed
  // mixture estimators only
  int gstar_mode = 0;
  double share_allocated = 0.0;       // countries with Pr(true label) > 0.9
  Eigen::VectorXd log_lambda_median;
  double share_ineff_below_30 = 0.0;
};

std::vector<ExperimentRow> run_experiment(const DgpSpec& spec, const ExperimentPlan& plan);

// Median across replications per (estimator, T, sparsity).
std::vector<ExperimentRow> summarize_experiment(const std::vector<ExperimentRow>& rows);

void write_experiment_csv(const std::string& path, const std::vector<ExperimentRow>& rows);

}  // namespace pvarmix
