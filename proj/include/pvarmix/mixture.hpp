#pragma once

#include "pvarmix/distributions.hpp"
#include "pvarmix/panel.hpp"

#include <Eigen/Dense>

#include <vector>

namespace pvarmix {

// Columns of c are the domestic vectors c_i, [m x N].

Eigen::VectorXd draw_weights(const std::vector<int>& delta, int G, double p0, RngStream& rng,
                             Eigen::VectorXd* log_w = nullptr);

std::vector<int> draw_indicators(const Eigen::MatrixXd& c, const Eigen::VectorXd& log_w, const Eigen::MatrixXd& mu,
                                 const Eigen::VectorXd& V, RngStream& rng);

Eigen::MatrixXd draw_group_means(const Eigen::MatrixXd& c, const std::vector<int>& delta, const Eigen::VectorXd& V,
                                 const Eigen::VectorXd& mu0, const Eigen::VectorXd& Q0, int G, RngStream& rng);

Eigen::VectorXd draw_common_variance(const Eigen::MatrixXd& c, const std::vector<int>& delta,
                                     const Eigen::MatrixXd& mu, double w0, double w1, RngStream& rng);

// Squared range of each row of c, floored at 1e-10.
Eigen::VectorXd squared_range(const Eigen::MatrixXd& c);

Eigen::VectorXd draw_lambda(const Eigen::MatrixXd& mu, const Eigen::VectorXd& mu0, const Eigen::VectorXd& range_sq,
                            double nu1, double nu2, RngStream& rng);

// prior_var <= 0 selects the flat prior on mu0.
Eigen::VectorXd draw_mu0(const Eigen::MatrixXd& mu, const Eigen::VectorXd& Q0, RngStream& rng,
                         double prior_var = 0.0);

// log p(w | p0) p(p0) for the Dirichlet / Gamma(c0, c0 G) pair.
double p0_log_target(double p0, const Eigen::VectorXd& log_w, double c0);

struct P0Draw {
  double p0;
  bool accepted;
};

// Log-scale random walk with proposal variance `tuning`.
P0Draw draw_p0(const Eigen::VectorXd& log_w, double p0, double c0, double tuning, RngStream& rng);

// Robbins-Monro style nudge of the tuning toward the 20-40% acceptance band.
double adapt_p0_tuning(double tuning, double acceptance_rate);

// Uniform permutation applied jointly to w, log_w, mu and delta.
std::vector<int> permute_labels(MixtureState& mix, RngStream& rng);
void apply_permutation(MixtureState& mix, const std::vector<int>& perm);

int active_clusters(const std::vector<int>& delta, int G);

double qps(const std::vector<int>& delta_true, const Eigen::VectorXd& delta_mean);

// Ex-post labels for one draw: nonempty components ordered by the scheme
// get labels 0..G*-1; empty components follow. Returns label per component.
std::vector<int> identified_labels(const Eigen::VectorXd& w, const Eigen::MatrixXd& mu, const std::vector<int>& delta,
                                   IdentScheme scheme, int coord);

}  // namespace pvarmix
