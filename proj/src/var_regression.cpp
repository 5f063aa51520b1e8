#include "pvarmix/var_regression.hpp"

#include "pvarmix/error.hpp"

#include <cmath>

namespace pvarmix {

namespace {

void check_prior(const EquationPrior& prior, Eigen::Index d) {
  require(prior.mean.size() == d && prior.var.size() == d, ErrorKind::dimension_mismatch, "equation prior size");
  require((prior.var.array() > 0).all() && prior.var.allFinite(), ErrorKind::invalid_parameter,
          "prior variances must be positive");
}

}  // namespace

EquationPosterior equation_posterior(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& omega, const EquationPrior& prior) {
  require(X.rows() == y.size() && omega.size() == y.size(), ErrorKind::dimension_mismatch, "regression rows");
  check_prior(prior, X.cols());
  const Eigen::VectorXd scale = (-0.5 * omega.array()).exp();
  const Eigen::MatrixXd Xs = scale.asDiagonal() * X;
  const Eigen::VectorXd ys = scale.cwiseProduct(y);
  EquationPosterior post;
  post.precision = Xs.transpose() * Xs;
  post.precision.diagonal() += prior.var.cwiseInverse();
  const Eigen::VectorXd linear = Xs.transpose() * ys + prior.mean.cwiseQuotient(prior.var);
  post.mean = post.precision.ldlt().solve(linear);
  return post;
}

Eigen::VectorXd draw_equation_coeffs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& omega, const EquationPrior& prior, RngStream& rng) {
  require(X.rows() == y.size() && omega.size() == y.size(), ErrorKind::dimension_mismatch, "regression rows");
  check_prior(prior, X.cols());
  const Eigen::Index d = X.cols();
  const Eigen::VectorXd scale = (-0.5 * omega.array()).exp();
  const Eigen::MatrixXd Xs = scale.asDiagonal() * X;
  Eigen::MatrixXd Q(d, d);
  Q.setZero();
  Q.selfadjointView<Eigen::Lower>().rankUpdate(Xs.transpose());
  Q.diagonal() += prior.var.cwiseInverse();
  Eigen::VectorXd linear = Xs.transpose() * scale.cwiseProduct(y) + prior.mean.cwiseQuotient(prior.var);

  const Eigen::VectorXd dinv = Q.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd Qf = Q.selfadjointView<Eigen::Lower>();
  Eigen::MatrixXd Qs = dinv.asDiagonal() * Qf * dinv.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(Qs);
  if (llt.info() != Eigen::Success) {
    Qs.diagonal().array() += 1e-8;
    llt.compute(Qs);
  }
  require(llt.info() == Eigen::Success, ErrorKind::numeric_failure, "coefficient precision not positive definite");
  const Eigen::VectorXd piv = llt.matrixLLT().diagonal().array().square();
  require(piv.maxCoeff() / piv.minCoeff() < 1e12, ErrorKind::numeric_failure,
          "coefficient precision numerically singular");

  Eigen::VectorXd z(d);
  for (Eigen::Index r = 0; r < d; ++r) z[r] = rng.normal();
  Eigen::VectorXd b = llt.solve(dinv.cwiseProduct(linear));
  b += llt.matrixU().solve(z);
  return dinv.cwiseProduct(b);
}

Eigen::VectorXd draw_equation_coeffs(int i, int j, const PanelData& panel, const ParameterState& state, int P,
                                     const EquationPrior& prior, RngStream& rng) {
  const int M = panel.M();
  const int n = i * M + j;
  const Design d = build_design(panel, i, P);
  Eigen::MatrixXd X(d.domestic.rows(), d.domestic.cols() + d.foreign.cols());
  X << d.domestic, d.foreign;
  Eigen::VectorXd y = panel.Y.col(n).tail(X.rows());
  if (state.q() > 0) y -= state.F * state.L.row(n).transpose();
  return draw_equation_coeffs(X, y, state.Omega.col(n), prior, rng);
}

}  // namespace pvarmix
