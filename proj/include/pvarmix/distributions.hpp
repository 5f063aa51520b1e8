#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace pvarmix {

// A reproducible random stream. Two streams built from the same
// (seed, stream_id) pair emit the same variates; different stream ids are
// decorrelated through std::seed_seq.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  std::uint64_t next_u64() { return engine_(); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Derive an independent child stream, e.g. one per replication.
  RngStream split(std::uint64_t child) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// Stable 64-bit hash used to derive stream ids from labels.
std::uint64_t hash_label(std::string_view text);

double sample_gamma(double shape, double rate, RngStream& rng);
// log of a Gamma(shape, 1) variate; stays finite for shapes far below 1
// where the variate itself underflows.
double sample_log_gamma(double shape, RngStream& rng);
double sample_inverse_gamma(double shape, double scale, RngStream& rng);
double sample_beta(double a, double b, RngStream& rng);

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, RngStream& rng);
// Same draw as sample_dirichlet but returns log weights.
Eigen::VectorXd sample_log_dirichlet(const Eigen::VectorXd& alpha, RngStream& rng);

// Zero-based index drawn with probability p[g] (renormalized).
int sample_categorical(std::span<const double> p, RngStream& rng);
int sample_categorical(const Eigen::VectorXd& p, RngStream& rng);
// Same, from unnormalized log probabilities (max-subtracted internally).
int sample_categorical_log(const Eigen::VectorXd& log_p, RngStream& rng);

// Draw from N(precision^{-1} * linear, precision^{-1}) through a Cholesky
// factor of the precision. A failed factorization is retried once with
// diagonal jitter 1e-8 * trace / dim.
Eigen::VectorXd sample_normal_canonical(const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear,
                                        RngStream& rng);
// Draw from N(mean, cov) with cov given by a lower Cholesky factor.
Eigen::VectorXd sample_normal_chol(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_lower, RngStream& rng);
Eigen::VectorXd sample_normal_cov(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RngStream& rng);

// Generalized inverse Gaussian with density proportional to
// x^{a-1} exp{-(b x + c / x) / 2}. Exact ratio-of-uniforms / rejection
// generators over the whole parameter range (Hormann & Leydold, 2014).
double sample_gig(double a, double b, double c, RngStream& rng);

// GIG draw for full conditionals where c can legitimately be zero (a
// coefficient or a distance that is exactly 0). When a <= 0 and c is below
// 1e-16 * b, c is raised to that floor and the clamp counter is bumped.
double sample_gig_clamped(double a, double b, double c, RngStream& rng);
std::uint64_t gig_clamp_count();
void reset_gig_clamp_count();

// log K_nu(x), modified Bessel function of the second kind. Temme series for
// x < 2, Steed's continued fraction otherwise, then forward recurrence in
// the order, all carried in log/ratio form so large orders do not overflow.
double log_bessel_k(double nu, double x);

// E[x] and E[x^2] of GIG(a, b, c) via Bessel ratios.
double gig_mean(double a, double b, double c);
double gig_second_moment(double a, double b, double c);

// Log of the closed-form marginal prior of one coordinate of the cluster
// centers, integrating the Gamma(nu1, nu2) scale out of
// prod_g N(mu_g | mu0, lambda R2). Returns +inf for the e -> 0 limit when
// the order nu1 - G/2 is non-positive.
double ng_marginal_logdensity(std::span<const double> mu_block, double mu0, double range_sq, double nu1, double nu2);

double log_normal_pdf(double x, double mean, double var);
double log_gamma_pdf(double x, double shape, double rate);

}  // namespace pvarmix
