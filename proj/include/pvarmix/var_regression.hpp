#pragma once

#include "pvarmix/distributions.hpp"
#include "pvarmix/panel.hpp"

#include <Eigen/Dense>

namespace pvarmix {

// Gaussian prior of one equation's stacked (domestic, foreign) coefficients.
// Covariance is diagonal.
struct EquationPrior {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

// Posterior in canonical form, precision = X~'X~ + W^{-1}.
struct EquationPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
};

// X, y are the raw regressors and target; rows are rescaled by exp(-omega_t/2).
EquationPosterior equation_posterior(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& omega, const EquationPrior& prior);

// Draw from the posterior above. The precision is Jacobi-scaled before the
// Cholesky factorization; a scaled condition proxy above 1e12 is rejected
// with numeric-failure.
Eigen::VectorXd draw_equation_coeffs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& omega, const EquationPrior& prior, RngStream& rng);

// Convenience form on a panel: equation j of country i, with target
// y_{ij,t} - [L]_{n.} f_t and n = i*M + j.
Eigen::VectorXd draw_equation_coeffs(int i, int j, const PanelData& panel, const ParameterState& state, int P,
                                     const EquationPrior& prior, RngStream& rng);

}  // namespace pvarmix
