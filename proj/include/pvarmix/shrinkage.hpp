#pragma once

#include "pvarmix/distributions.hpp"

#include <Eigen/Dense>

namespace pvarmix {

struct NGHyper {
  double cc0 = 0.01;
  double cc1 = 0.01;
  double vartheta = 0.1;
  // Rate printed as cc0 + (vartheta/2) * sum tau instead of
  // cc1 + (vartheta/2) * sum tau^2.
  bool literal_rate = false;
};

// Global scale for one group of local scales (a country's foreign block, or
// one lag in the large-VAR prior). k = tau2.size().
double draw_xi(const Eigen::VectorXd& tau2, const NGHyper& hyper, RngStream& rng);

// Local scale of one coefficient; b = 0 goes through the clamped GIG path.
double draw_tau(double b, double xi, double vartheta, RngStream& rng);

// The local scale is carried as the prior variance of its coefficient:
//   b ~ N(0, tau2),  tau2 ~ Gamma(vartheta, rate vartheta * xi / 2),
// the same marginal prior as b ~ N(0, 2 t^2 / xi), t^2 ~ Gamma(vartheta, vartheta)
// with tau2 = 2 t^2 / xi. draw_xi and draw_tau are exact in this form.
inline double ng_prior_var(double tau2) { return tau2; }
inline double unit_local_scale(double tau2, double xi) { return 0.5 * xi * tau2; }

double draw_tau_prior(double xi, double vartheta, RngStream& rng);

}  // namespace pvarmix
