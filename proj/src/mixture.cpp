#include "pvarmix/mixture.hpp"

#include "pvarmix/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pvarmix {

namespace {

std::vector<int> component_counts(const std::vector<int>& delta, int G) {
  std::vector<int> n(static_cast<std::size_t>(G), 0);
  for (int d : delta) {
    require(d >= 0 && d < G, ErrorKind::invalid_parameter, "indicator out of range");
    ++n[static_cast<std::size_t>(d)];
  }
  return n;
}

}  // namespace

Eigen::VectorXd draw_weights(const std::vector<int>& delta, int G, double p0, RngStream& rng,
                             Eigen::VectorXd* log_w) {
  require(p0 > 0, ErrorKind::invalid_parameter, "p0 must be positive");
  const auto n = component_counts(delta, G);
  Eigen::VectorXd alpha(G);
  for (int g = 0; g < G; ++g) alpha[g] = p0 + n[static_cast<std::size_t>(g)];
  Eigen::VectorXd lw = sample_log_dirichlet(alpha, rng);
  Eigen::VectorXd w = lw.array().exp();
  w /= w.sum();
  if (log_w) *log_w = lw;
  return w;
}

std::vector<int> draw_indicators(const Eigen::MatrixXd& c, const Eigen::VectorXd& log_w, const Eigen::MatrixXd& mu,
                                 const Eigen::VectorXd& V, RngStream& rng) {
  const Eigen::Index N = c.cols();
  const Eigen::Index G = mu.cols();
  require(mu.rows() == c.rows() && V.size() == c.rows() && log_w.size() == G, ErrorKind::dimension_mismatch,
          "indicator inputs");
  const Eigen::ArrayXd iv = V.array().inverse();
  std::vector<int> delta(static_cast<std::size_t>(N));
  Eigen::VectorXd lp(G);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index g = 0; g < G; ++g) {
      lp[g] = log_w[g] - 0.5 * ((c.col(i) - mu.col(g)).array().square() * iv).sum();
    }
    delta[static_cast<std::size_t>(i)] = sample_categorical_log(lp, rng);
  }
  return delta;
}

Eigen::MatrixXd draw_group_means(const Eigen::MatrixXd& c, const std::vector<int>& delta, const Eigen::VectorXd& V,
                                 const Eigen::VectorXd& mu0, const Eigen::VectorXd& Q0, int G, RngStream& rng) {
  const Eigen::Index m = c.rows();
  const auto n = component_counts(delta, G);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(m, G);
  for (std::size_t i = 0; i < delta.size(); ++i) sums.col(delta[i]) += c.col(static_cast<Eigen::Index>(i));
  Eigen::MatrixXd mu(m, G);
  for (int g = 0; g < G; ++g) {
    const double ng = n[static_cast<std::size_t>(g)];
    for (Eigen::Index j = 0; j < m; ++j) {
      // diagonal V and Q0: coordinates are independent
      const double prec = ng / V[j] + 1.0 / Q0[j];
      const double lin = sums(j, g) / V[j] + mu0[j] / Q0[j];
      mu(j, g) = lin / prec + rng.normal() / std::sqrt(prec);
    }
  }
  return mu;
}

Eigen::VectorXd draw_common_variance(const Eigen::MatrixXd& c, const std::vector<int>& delta,
                                     const Eigen::MatrixXd& mu, double w0, double w1, RngStream& rng) {
  const Eigen::Index m = c.rows();
  const double N = static_cast<double>(c.cols());
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < delta.size(); ++i) {
    ss += (c.col(static_cast<Eigen::Index>(i)) - mu.col(delta[i])).array().square().matrix();
  }
  Eigen::VectorXd V(m);
  for (Eigen::Index j = 0; j < m; ++j) V[j] = sample_inverse_gamma(w0 + 0.5 * N, w1 + 0.5 * ss[j], rng);
  return V;
}

Eigen::VectorXd squared_range(const Eigen::MatrixXd& c) {
  Eigen::VectorXd r(c.rows());
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    const double d = c.row(j).maxCoeff() - c.row(j).minCoeff();
    r[j] = std::max(d * d, 1e-10);
  }
  return r;
}

Eigen::VectorXd draw_lambda(const Eigen::MatrixXd& mu, const Eigen::VectorXd& mu0, const Eigen::VectorXd& range_sq,
                            double nu1, double nu2, RngStream& rng) {
  const Eigen::Index m = mu.rows();
  const double G = static_cast<double>(mu.cols());
  require((range_sq.array() > 0).all(), ErrorKind::invalid_parameter, "R2 must be positive");
  Eigen::VectorXd lambda(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double e = (mu.row(j).array() - mu0[j]).square().sum() / range_sq[j];
    lambda[j] = sample_gig_clamped(nu1 - 0.5 * G, 2.0 * nu2, e, rng);
  }
  return lambda;
}

Eigen::VectorXd draw_mu0(const Eigen::MatrixXd& mu, const Eigen::VectorXd& Q0, RngStream& rng, double prior_var) {
  const double G = static_cast<double>(mu.cols());
  require(mu.cols() >= 1, ErrorKind::invalid_parameter, "need G >= 1");
  const Eigen::VectorXd mean = mu.rowwise().mean();
  Eigen::VectorXd out(mu.rows());
  for (Eigen::Index j = 0; j < mu.rows(); ++j) {
    double prec = G / Q0[j];
    double lin = G * mean[j] / Q0[j];
    if (prior_var > 0) prec += 1.0 / prior_var;
    out[j] = lin / prec + rng.normal() / std::sqrt(prec);
  }
  return out;
}

double p0_log_target(double p0, const Eigen::VectorXd& log_w, double c0) {
  const double G = static_cast<double>(log_w.size());
  return std::lgamma(G * p0) - G * std::lgamma(p0) + (p0 - 1.0) * log_w.sum() + log_gamma_pdf(p0, c0, c0 * G);
}

P0Draw draw_p0(const Eigen::VectorXd& log_w, double p0, double c0, double tuning, RngStream& rng) {
  require(p0 > 0 && tuning > 0, ErrorKind::invalid_parameter, "p0 and tuning must be positive");
  const double z = std::sqrt(tuning) * rng.normal();
  const double prop = p0 * std::exp(z);
  if (!(prop > 0) || !std::isfinite(prop)) return {p0, false};
  // the last term is the log-scale Jacobian p0* / p0
  const double log_a = p0_log_target(prop, log_w, c0) - p0_log_target(p0, log_w, c0) + z;
  if (std::log(rng.uniform()) < log_a) return {prop, true};
  return {p0, false};
}

double adapt_p0_tuning(double tuning, double acceptance_rate) {
  if (acceptance_rate < 0.2) return tuning * 0.6;
  if (acceptance_rate > 0.4) return std::min(tuning * 1.6, 100.0);
  return tuning;
}

void apply_permutation(MixtureState& mix, const std::vector<int>& perm) {
  const int G = mix.G();
  require(static_cast<int>(perm.size()) == G, ErrorKind::dimension_mismatch, "permutation size");
  // new component g takes old component perm[g]
  Eigen::VectorXd w(G);
  Eigen::VectorXd lw(G);
  Eigen::MatrixXd mu(mix.mu.rows(), G);
  std::vector<int> inverse(static_cast<std::size_t>(G));
  for (int g = 0; g < G; ++g) {
    const int old = perm[static_cast<std::size_t>(g)];
    w[g] = mix.w[old];
    lw[g] = mix.log_w.size() == G ? mix.log_w[old] : std::log(mix.w[old]);
    mu.col(g) = mix.mu.col(old);
    inverse[static_cast<std::size_t>(old)] = g;
  }
  mix.w = w;
  mix.log_w = lw;
  mix.mu = mu;
  for (int& d : mix.delta) d = inverse[static_cast<std::size_t>(d)];
}

std::vector<int> permute_labels(MixtureState& mix, RngStream& rng) {
  const int G = mix.G();
  std::vector<int> perm(static_cast<std::size_t>(G));
  std::iota(perm.begin(), perm.end(), 0);
  for (int g = G - 1; g > 0; --g) {
    const int k = static_cast<int>(rng.uniform() * (g + 1));
    std::swap(perm[static_cast<std::size_t>(g)], perm[static_cast<std::size_t>(std::min(k, g))]);
  }
  apply_permutation(mix, perm);
  return perm;
}

int active_clusters(const std::vector<int>& delta, int G) {
  const auto n = component_counts(delta, G);
  return static_cast<int>(std::count_if(n.begin(), n.end(), [](int v) { return v > 0; }));
}

double qps(const std::vector<int>& delta_true, const Eigen::VectorXd& delta_mean) {
  require(static_cast<Eigen::Index>(delta_true.size()) == delta_mean.size() && !delta_true.empty(),
          ErrorKind::dimension_mismatch, "qps inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < delta_true.size(); ++i) {
    const double d = delta_true[i] - delta_mean[static_cast<Eigen::Index>(i)];
    s += d * d;
  }
  return s / static_cast<double>(delta_true.size());
}

std::vector<int> identified_labels(const Eigen::VectorXd& w, const Eigen::MatrixXd& mu, const std::vector<int>& delta,
                                   IdentScheme scheme, int coord) {
  const int G = static_cast<int>(w.size());
  const auto n = component_counts(delta, G);
  std::vector<int> order(static_cast<std::size_t>(G));
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int g) { return scheme == IdentScheme::weight ? w[g] : mu(coord, g); };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const bool ea = n[static_cast<std::size_t>(a)] == 0;
    const bool eb = n[static_cast<std::size_t>(b)] == 0;
    if (ea != eb) return eb;
    return key(a) < key(b);
  });
  std::vector<int> label(static_cast<std::size_t>(G));
  for (int r = 0; r < G; ++r) label[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
  return label;
}

}  // namespace pvarmix
