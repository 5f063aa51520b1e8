#pragma once

#include "pvarmix/distributions.hpp"
#include "pvarmix/panel.hpp"

#include <Eigen/Dense>

#include <array>

namespace pvarmix {

struct SVPrior {
  double phi_mean = 0.0;
  double phi_var = 100.0;
  double sigma_shape = 0.5;  // sigma^2 ~ Gamma(shape, rate)
  double sigma_rate = 0.5;
  double rho_a = 25.0;       // (rho + 1) / 2 ~ Beta(a, b)
  double rho_b = 5.0;

  static SVPrior from_config(const ModelConfig& cfg);
};

// Ten-component normal mixture approximating log chi^2_1, from
// Omori, Chib, Shephard & Nakajima (2007), Table 1.
struct LogChi2Mixture {
  static constexpr std::array<double, 10> prob{0.00609, 0.04775, 0.13057, 0.20674, 0.22715,
                                               0.18842, 0.12047, 0.05591, 0.01575, 0.00115};
  static constexpr std::array<double, 10> mean{1.92677, 1.34744, 0.73504, 0.02266, -0.85173,
                                               -1.97278, -3.46788, -5.55246, -8.68384, -14.65000};
  static constexpr std::array<double, 10> var{0.11265, 0.17788, 0.26768, 0.40611, 0.62699,
                                              0.98583, 1.57469, 2.54498, 4.16591, 7.33342};
  static double log_density(double u);
};

// Exact log density of log(chi^2_1) at u.
double log_chi2_1_log_density(double u);

// Row j of L. Rows j < q carry the identification constraint: entries
// 0..j-1 are drawn, entry j is 1, the rest 0.
Eigen::RowVectorXd draw_loadings(int j, const Eigen::MatrixXd& F, const Eigen::VectorXd& eps_j,
                                 const Eigen::VectorXd& omega_j, double prior_var, RngStream& rng);

struct FactorPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// f_t | eps_t via W_t = H_t L' Sigma_t^{-1}.
FactorPosterior factor_posterior_cov_form(const Eigen::MatrixXd& L, const Eigen::VectorXd& h_t,
                                          const Eigen::VectorXd& omega_t, const Eigen::VectorXd& eps_t);
// Same moments through (L' Omega_t^{-1} L + H_t^{-1})^{-1}.
FactorPosterior factor_posterior_precision_form(const Eigen::MatrixXd& L, const Eigen::VectorXd& h_t,
                                                const Eigen::VectorXd& omega_t, const Eigen::VectorXd& eps_t);

Eigen::VectorXd draw_factors(const Eigen::MatrixXd& L, const Eigen::VectorXd& h_t, const Eigen::VectorXd& omega_t,
                             const Eigen::VectorXd& eps_t, RngStream& rng);

// Log-variance path given shocks y_t ~ N(0, e^{h_t}). Auxiliary-mixture
// proposal (indicators, then a tridiagonal Gaussian path draw) followed by a
// Metropolis-Hastings correction against the exact log chi^2_1 likelihood.
// Zero shocks are offset by 1e-30 before taking logs.
Eigen::VectorXd draw_logvol_path(const Eigen::VectorXd& y, const SVParams& params, const Eigen::VectorXd& current,
                                 RngStream& rng, bool* accepted = nullptr);

// (phi, rho, sigma) given the path, then an interweaving move in the
// non-centered parameterization that may shift and rescale the path.
// Pass an empty y to skip the interweaving move.
SVParams draw_sv_params(Eigen::VectorXd& path, const Eigen::VectorXd& y, const SVParams& current,
                        const SVPrior& prior, RngStream& rng);

SVParams draw_sv_prior(const SVPrior& prior, RngStream& rng);

// Stationary AR(1) path of length T.
Eigen::VectorXd simulate_logvol_path(const SVParams& params, int T, RngStream& rng);

// Log density of the path under its AR(1) prior, stationary start.
double logvol_path_logdensity(const Eigen::VectorXd& path, const SVParams& params);

}  // namespace pvarmix
