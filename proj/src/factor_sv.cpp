#include "pvarmix/factor_sv.hpp"

#include "pvarmix/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pvarmix {

namespace {

constexpr double kZeroOffset = 1e-30;
constexpr int kMaxRhoTries = 10000;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_rho_prior(double rho, const SVPrior& prior) {
  return (prior.rho_a - 1.0) * std::log1p(rho) + (prior.rho_b - 1.0) * std::log1p(-rho);
}

// log N(h_1 | phi, sigma^2 / (1 - rho^2)) up to -log sqrt(2 pi)
double log_stationary(double h1, double phi, double rho, double sigma) {
  const double one_m = 1.0 - rho * rho;
  const double d = h1 - phi;
  return 0.5 * std::log(one_m) - std::log(sigma) - 0.5 * one_m * d * d / (sigma * sigma);
}

// In-place Cholesky of a symmetric tridiagonal matrix: diag -> l, off -> sub.
void tridiag_cholesky(Eigen::VectorXd& diag, Eigen::VectorXd& off) {
  const Eigen::Index T = diag.size();
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0) diag[t] -= off[t - 1] * off[t - 1];
    require(diag[t] > 0, ErrorKind::numeric_failure, "log-volatility precision not positive definite");
    diag[t] = std::sqrt(diag[t]);
    if (t + 1 < T) off[t] /= diag[t];
  }
}

double log_chi2_weight(const Eigen::VectorXd& z, const Eigen::VectorXd& h) {
  double s = 0.0;
  for (Eigen::Index t = 0; t < z.size(); ++t) {
    const double u = z[t] - h[t];
    s += log_chi2_1_log_density(u) - LogChi2Mixture::log_density(u);
  }
  return s;
}

}  // namespace

SVPrior SVPrior::from_config(const ModelConfig& cfg) {
  return SVPrior{cfg.sv_phi_mean, cfg.sv_phi_var, cfg.sv_sigma_shape, cfg.sv_sigma_rate, cfg.sv_rho_a, cfg.sv_rho_b};
}

double LogChi2Mixture::log_density(double u) {
  std::array<double, 10> lp{};
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < 10; ++k) {
    const double r = u - mean[k];
    lp[k] = std::log(prob[k]) - kLogSqrt2Pi - 0.5 * std::log(var[k]) - 0.5 * r * r / var[k];
    mx = std::max(mx, lp[k]);
  }
  double s = 0.0;
  for (double v : lp) s += std::exp(v - mx);
  return mx + std::log(s);
}

double log_chi2_1_log_density(double u) { return -kLogSqrt2Pi + 0.5 * u - 0.5 * std::exp(u); }

Eigen::RowVectorXd draw_loadings(int j, const Eigen::MatrixXd& F, const Eigen::VectorXd& eps_j,
                                 const Eigen::VectorXd& omega_j, double prior_var, RngStream& rng) {
  const Eigen::Index q = F.cols();
  require(F.rows() == eps_j.size() && omega_j.size() == eps_j.size(), ErrorKind::dimension_mismatch,
          "loading regression rows");
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(q);
  const Eigen::Index free = std::min<Eigen::Index>(j, q);
  Eigen::VectorXd target = eps_j;
  if (j < q) {
    row[j] = 1.0;
    target -= F.col(j);
  }
  if (free == 0) return row;
  const Eigen::VectorXd scale = (-0.5 * omega_j.array()).exp();
  const Eigen::MatrixXd Fs = scale.asDiagonal() * F.leftCols(free);
  Eigen::MatrixXd prec = Fs.transpose() * Fs;
  prec.diagonal().array() += 1.0 / prior_var;
  const Eigen::VectorXd lin = Fs.transpose() * scale.cwiseProduct(target);
  row.head(free) = sample_normal_canonical(prec, lin, rng).transpose();
  return row;
}

FactorPosterior factor_posterior_cov_form(const Eigen::MatrixXd& L, const Eigen::VectorXd& h_t,
                                          const Eigen::VectorXd& omega_t, const Eigen::VectorXd& eps_t) {
  const Eigen::MatrixXd H = h_t.array().exp().matrix().asDiagonal();
  const Eigen::MatrixXd S = assemble_sigma(L, h_t, omega_t);
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  require(llt.info() == Eigen::Success, ErrorKind::numeric_failure, "Sigma_t not positive definite");
  const Eigen::MatrixXd W = llt.solve(L * H).transpose();  // H L' S^{-1}
  FactorPosterior out;
  out.mean = W * eps_t;
  out.cov = H - W * S * W.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

FactorPosterior factor_posterior_precision_form(const Eigen::MatrixXd& L, const Eigen::VectorXd& h_t,
                                                const Eigen::VectorXd& omega_t, const Eigen::VectorXd& eps_t) {
  const Eigen::VectorXd oinv = (-omega_t.array()).exp();
  Eigen::MatrixXd prec = L.transpose() * oinv.asDiagonal() * L;
  prec.diagonal() += (-h_t.array()).exp().matrix();
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  require(llt.info() == Eigen::Success, ErrorKind::numeric_failure, "factor precision not positive definite");
  FactorPosterior out;
  out.cov = llt.solve(Eigen::MatrixXd::Identity(prec.rows(), prec.cols()));
  out.mean = llt.solve(L.transpose() * oinv.cwiseProduct(eps_t));
  return out;
}

Eigen::VectorXd draw_factors(const Eigen::MatrixXd& L, const Eigen::VectorXd& h_t, const Eigen::VectorXd& omega_t,
                             const Eigen::VectorXd& eps_t, RngStream& rng) {
  const Eigen::VectorXd oinv = (-omega_t.array()).exp();
  Eigen::MatrixXd prec = L.transpose() * oinv.asDiagonal() * L;
  prec.diagonal() += (-h_t.array()).exp().matrix();
  return sample_normal_canonical(prec, L.transpose() * oinv.cwiseProduct(eps_t), rng);
}

Eigen::VectorXd draw_logvol_path(const Eigen::VectorXd& y, const SVParams& params, const Eigen::VectorXd& current,
                                 RngStream& rng, bool* accepted) {
  const Eigen::Index T = y.size();
  require(current.size() == T, ErrorKind::dimension_mismatch, "path length");
  require(params.sigma > 0 && std::abs(params.rho) < 1.0, ErrorKind::invalid_parameter, "SV parameters");
  if (accepted) *accepted = true;
  if (T == 0) return current;
  const double phi = params.phi;
  const double rho = params.rho;
  const double is2 = 1.0 / (params.sigma * params.sigma);

  Eigen::VectorXd z(T);
  for (Eigen::Index t = 0; t < T; ++t) z[t] = std::log(y[t] * y[t] + kZeroOffset);

  // mixture indicators given the current path
  Eigen::VectorXd diag(T);
  Eigen::VectorXd off = Eigen::VectorXd::Constant(std::max<Eigen::Index>(T - 1, 0), -rho * is2);
  Eigen::VectorXd lin(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double u = z[t] - current[t];
    Eigen::VectorXd lp(10);
    for (int k = 0; k < 10; ++k) {
      const double r = u - LogChi2Mixture::mean[k];
      lp[k] = std::log(LogChi2Mixture::prob[k]) - 0.5 * std::log(LogChi2Mixture::var[k]) -
              0.5 * r * r / LogChi2Mixture::var[k];
    }
    const int k = sample_categorical_log(lp, rng);
    diag[t] = 1.0 / LogChi2Mixture::var[k];
    lin[t] = (z[t] - LogChi2Mixture::mean[k]) / LogChi2Mixture::var[k];
  }
  if (T == 1) {
    diag[0] += (1.0 - rho * rho) * is2;
    lin[0] += (1.0 - rho * rho) * is2 * phi;
  } else {
    for (Eigen::Index t = 0; t < T; ++t) {
      const bool edge = t == 0 || t == T - 1;
      diag[t] += (edge ? 1.0 : 1.0 + rho * rho) * is2;
      lin[t] += (edge ? (1.0 - rho) : (1.0 - rho) * (1.0 - rho)) * is2 * phi;
    }
  }
  tridiag_cholesky(diag, off);
  // forward solve L a = lin
  Eigen::VectorXd a(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    double v = lin[t];
    if (t > 0) v -= off[t - 1] * a[t - 1];
    a[t] = v / diag[t];
  }
  // backward solve L' h = a + e
  Eigen::VectorXd prop(T);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    double v = a[t] + rng.normal();
    if (t + 1 < T) v -= off[t] * prop[t + 1];
    prop[t] = v / diag[t];
  }
  const double log_ratio = log_chi2_weight(z, prop) - log_chi2_weight(z, current);
  if (std::log(rng.uniform()) < log_ratio) return prop;
  if (accepted) *accepted = false;
  return current;
}

namespace {

// Laplace-approximation independence step for (phi, s) with h = phi + s*ht.
void noncentered_step(const Eigen::VectorXd& ht, const Eigen::VectorXd& y2, double& phi, double& s,
                      const SVPrior& prior, RngStream& rng) {
  const Eigen::Index T = ht.size();
  const double two_beta = 2.0 * prior.sigma_rate;
  auto log_target = [&](double ph, double ss) {
    double v = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      const double u = ph + ss * ht[t];
      v += -0.5 * u - 0.5 * y2[t] * std::exp(-u);
    }
    const double d = ph - prior.phi_mean;
    v += -0.5 * d * d / prior.phi_var - 0.5 * two_beta * ss * ss;
    return v;
  };
  auto grad_hess = [&](double ph, double ss, Eigen::Vector2d& g, Eigen::Matrix2d& hs) {
    g.setZero();
    hs.setZero();
    for (Eigen::Index t = 0; t < T; ++t) {
      const double e = y2[t] * std::exp(-(ph + ss * ht[t]));
      const double g1 = -0.5 + 0.5 * e;
      const double h1 = -0.5 * e;
      g[0] += g1;
      g[1] += g1 * ht[t];
      hs(0, 0) += h1;
      hs(0, 1) += h1 * ht[t];
      hs(1, 1) += h1 * ht[t] * ht[t];
    }
    g[0] -= (ph - prior.phi_mean) / prior.phi_var;
    g[1] -= two_beta * ss;
    hs(0, 0) -= 1.0 / prior.phi_var;
    hs(1, 1) -= two_beta;
    hs(1, 0) = hs(0, 1);
  };
  double mean_y2 = y2.mean();
  Eigen::Vector2d x(std::log(mean_y2), 0.0);
  Eigen::Vector2d g;
  Eigen::Matrix2d hs;
  double f = log_target(x[0], x[1]);
  for (int it = 0; it < 100; ++it) {
    grad_hess(x[0], x[1], g, hs);
    const Eigen::Vector2d step = hs.ldlt().solve(-g);
    double scale = 1.0;
    Eigen::Vector2d xn = x + step;
    double fn = log_target(xn[0], xn[1]);
    while (!(fn >= f) && scale > 1e-10) {
      scale *= 0.5;
      xn = x + scale * step;
      fn = log_target(xn[0], xn[1]);
    }
    if (!(fn >= f)) break;
    const bool done = (xn - x).norm() < 1e-10 * (1.0 + x.norm());
    x = xn;
    f = fn;
    if (done) break;
  }
  grad_hess(x[0], x[1], g, hs);
  const Eigen::Matrix2d prec = -hs;
  Eigen::LLT<Eigen::Matrix2d> llt(prec);
  if (llt.info() != Eigen::Success) return;
  const Eigen::Matrix2d U = llt.matrixU();
  auto log_q = [&](const Eigen::Vector2d& v) {
    const Eigen::Vector2d r = U * (v - x);
    return -0.5 * r.squaredNorm();
  };
  const double shape_term = 2.0 * prior.sigma_shape - 1.0;
  auto log_pi = [&](const Eigen::Vector2d& v) {
    double lp = log_target(v[0], v[1]);
    if (shape_term != 0.0) lp += shape_term * std::log(std::abs(v[1]));
    return lp;
  };
  Eigen::Vector2d zz(rng.normal(), rng.normal());
  const Eigen::Vector2d prop = x + U.triangularView<Eigen::Upper>().solve(zz);
  const Eigen::Vector2d cur(phi, s);
  const double log_a = log_pi(prop) - log_pi(cur) + log_q(cur) - log_q(prop);
  if (std::log(rng.uniform()) < log_a) {
    phi = prop[0];
    s = prop[1];
  }
}

}  // namespace

SVParams draw_sv_params(Eigen::VectorXd& path, const Eigen::VectorXd& y, const SVParams& current,
                        const SVPrior& prior, RngStream& rng) {
  const Eigen::Index T = path.size();
  if (T == 0) return draw_sv_prior(prior, rng);
  require(y.size() == 0 || y.size() == T, ErrorKind::dimension_mismatch, "shock series length");
  SVParams p = current;

  // sigma^2 | h, phi, rho
  {
    const double d1 = path[0] - p.phi;
    double S = (1.0 - p.rho * p.rho) * d1 * d1;
    for (Eigen::Index t = 1; t < T; ++t) {
      const double r = (path[t] - p.phi) - p.rho * (path[t - 1] - p.phi);
      S += r * r;
    }
    const double a = prior.sigma_shape - 0.5 * static_cast<double>(T);
    p.sigma = std::sqrt(sample_gig_clamped(a, 2.0 * prior.sigma_rate, S, rng));
  }
  const double is2 = 1.0 / (p.sigma * p.sigma);

  // phi | h, rho, sigma
  {
    const double om = 1.0 - p.rho;
    double prec = (1.0 - p.rho * p.rho) * is2 + 1.0 / prior.phi_var;
    double lin = (1.0 - p.rho * p.rho) * is2 * path[0] + prior.phi_mean / prior.phi_var;
    for (Eigen::Index t = 1; t < T; ++t) {
      prec += om * om * is2;
      lin += om * is2 * (path[t] - p.rho * path[t - 1]);
    }
    p.phi = lin / prec + rng.normal() / std::sqrt(prec);
  }

  // rho | h, phi, sigma
  {
    double sxx = 0.0;
    double sxy = 0.0;
    for (Eigen::Index t = 1; t < T; ++t) {
      const double x = path[t - 1] - p.phi;
      sxx += x * x;
      sxy += x * (path[t] - p.phi);
    }
    double prop = 0.0;
    double log_a = 0.0;
    const double h1 = path[0];
    if (T < 2 || sxx < 1e-300) {
      prop = 2.0 * sample_beta(prior.rho_a, prior.rho_b, rng) - 1.0;
      log_a = log_stationary(h1, p.phi, prop, p.sigma) - log_stationary(h1, p.phi, p.rho, p.sigma);
    } else {
      const double m = sxy / sxx;
      const double sd = p.sigma / std::sqrt(sxx);
      int tries = 0;
      do {
        prop = m + sd * rng.normal();
        require(++tries <= kMaxRhoTries, ErrorKind::rejection_overflow, "rho proposal left (-1, 1) 10^4 times");
      } while (!(std::abs(prop) < 1.0));
      log_a = log_stationary(h1, p.phi, prop, p.sigma) + log_rho_prior(prop, prior) -
              log_stationary(h1, p.phi, p.rho, p.sigma) - log_rho_prior(p.rho, prior);
    }
    if (std::log(rng.uniform()) < log_a) p.rho = prop;
  }

  // interweaving: non-centered (phi, sigma) given the standardized path
  if (y.size() == T) {
    Eigen::VectorXd ht = (path.array() - p.phi) / p.sigma;
    const Eigen::VectorXd y2 = y.array().square() + kZeroOffset;
    double phi = p.phi;
    double s = p.sigma;
    noncentered_step(ht, y2, phi, s, prior, rng);
    if (s < 0) {
      s = -s;
      ht = -ht;
    }
    if (s > 0) {
      p.phi = phi;
      p.sigma = s;
      path = (phi + s * ht.array()).matrix();
    }
  }
  return p;
}

SVParams draw_sv_prior(const SVPrior& prior, RngStream& rng) {
  SVParams p;
  p.phi = prior.phi_mean + std::sqrt(prior.phi_var) * rng.normal();
  p.sigma = std::sqrt(sample_gamma(prior.sigma_shape, prior.sigma_rate, rng));
  double rho = 2.0 * sample_beta(prior.rho_a, prior.rho_b, rng) - 1.0;
  p.rho = std::clamp(rho, -1.0 + 1e-15, 1.0 - 1e-15);
  return p;
}

Eigen::VectorXd simulate_logvol_path(const SVParams& params, int T, RngStream& rng) {
  Eigen::VectorXd h(T);
  if (T == 0) return h;
  h[0] = params.phi + params.sigma / std::sqrt(1.0 - params.rho * params.rho) * rng.normal();
  for (int t = 1; t < T; ++t) h[t] = params.phi + params.rho * (h[t - 1] - params.phi) + params.sigma * rng.normal();
  return h;
}

double logvol_path_logdensity(const Eigen::VectorXd& path, const SVParams& params) {
  const Eigen::Index T = path.size();
  if (T == 0) return 0.0;
  double v = log_stationary(path[0], params.phi, params.rho, params.sigma) - kLogSqrt2Pi;
  for (Eigen::Index t = 1; t < T; ++t) {
    const double m = params.phi + params.rho * (path[t - 1] - params.phi);
    v += log_normal_pdf(path[t], m, params.sigma * params.sigma);
  }
  return v;
}

}  // namespace pvarmix
