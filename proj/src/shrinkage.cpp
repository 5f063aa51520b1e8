#include "pvarmix/shrinkage.hpp"

#include "pvarmix/error.hpp"

#include <cmath>

namespace pvarmix {

double draw_xi(const Eigen::VectorXd& tau2, const NGHyper& hyper, RngStream& rng) {
  require((tau2.array() > 0).all(), ErrorKind::invalid_parameter, "local scales must be positive");
  const double k = static_cast<double>(tau2.size());
  const double shape = hyper.cc0 + hyper.vartheta * k;
  const double rate = hyper.literal_rate ? hyper.cc0 + 0.5 * hyper.vartheta * tau2.array().sqrt().sum()
                                         : hyper.cc1 + 0.5 * hyper.vartheta * tau2.sum();
  return sample_gamma(shape, rate, rng);
}

double draw_tau(double b, double xi, double vartheta, RngStream& rng) {
  require(xi > 0 && vartheta > 0, ErrorKind::invalid_parameter, "xi and vartheta must be positive");
  return sample_gig_clamped(vartheta - 0.5, vartheta * xi, b * b, rng);
}

double draw_tau_prior(double xi, double vartheta, RngStream& rng) {
  return sample_gamma(vartheta, 0.5 * vartheta * xi, rng);
}

}  // namespace pvarmix
