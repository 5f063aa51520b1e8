#include "pvarmix/distributions.hpp"

#include "pvarmix/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pvarmix {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::domain_error: return "domain-error";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::numeric_failure: return "numeric-failure";
    case ErrorKind::degenerate_input: return "degenerate-input";
    case ErrorKind::rejection_overflow: return "rejection-overflow";
    case ErrorKind::insufficient_draws: return "insufficient-draws";
    case ErrorKind::non_stationary_dgp: return "non-stationary-dgp";
    case ErrorKind::io_error: return "io-error";
    case ErrorKind::config_error: return "config-error";
  }
  return "error";
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

std::atomic<std::uint64_t> g_gig_clamps{0};

constexpr double kPi = std::numbers::pi;

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() {
  // 53 random bits, shifted by half an ulp so 0 is never returned.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(engine_); }

RngStream RngStream::split(std::uint64_t child) const {
  return RngStream(seed_, stream_id_ * 0x100000001b3ULL + child + 1);
}

std::uint64_t hash_label(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double sample_log_gamma(double shape, RngStream& rng) {
  require(shape > 0 && std::isfinite(shape), ErrorKind::invalid_parameter, "gamma shape must be positive");
  if (shape < 1.0) {
    // G(a) = G(a + 1) * U^{1/a}
    return sample_log_gamma(shape + 1.0, rng) + std::log(rng.uniform()) / shape;
  }
  // Marsaglia & Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

double sample_gamma(double shape, double rate, RngStream& rng) {
  require(rate > 0 && std::isfinite(rate), ErrorKind::invalid_parameter, "gamma rate must be positive");
  return std::exp(sample_log_gamma(shape, rng)) / rate;
}

double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  require(scale > 0, ErrorKind::invalid_parameter, "inverse gamma scale must be positive");
  return scale * std::exp(-sample_log_gamma(shape, rng));
}

double sample_beta(double a, double b, RngStream& rng) {
  const double la = sample_log_gamma(a, rng);
  const double lb = sample_log_gamma(b, rng);
  const double m = std::max(la, lb);
  return std::exp(la - m) / (std::exp(la - m) + std::exp(lb - m));
}

Eigen::VectorXd sample_log_dirichlet(const Eigen::VectorXd& alpha, RngStream& rng) {
  require(alpha.size() > 0, ErrorKind::invalid_parameter, "dirichlet needs at least one component");
  Eigen::VectorXd lg(alpha.size());
  for (Eigen::Index g = 0; g < alpha.size(); ++g) {
    require(alpha[g] > 0 && std::isfinite(alpha[g]), ErrorKind::invalid_parameter,
            "dirichlet parameters must be positive");
    lg[g] = sample_log_gamma(alpha[g], rng);
  }
  const double m = lg.maxCoeff();
  const double lse = m + std::log((lg.array() - m).exp().sum());
  return lg.array() - lse;
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, RngStream& rng) {
  Eigen::VectorXd w = sample_log_dirichlet(alpha, rng).array().exp();
  return w / w.sum();
}

int sample_categorical(std::span<const double> p, RngStream& rng) {
  require(!p.empty(), ErrorKind::invalid_parameter, "empty probability vector");
  double total = 0;
  for (double v : p) {
    require(v >= 0 && std::isfinite(v), ErrorKind::invalid_parameter, "negative or non-finite probability");
    total += v;
  }
  require(total > 0, ErrorKind::invalid_parameter, "probabilities sum to zero");
  const double u = rng.uniform() * total;
  double acc = 0;
  int last_positive = 0;
  for (std::size_t g = 0; g < p.size(); ++g) {
    if (p[g] > 0) last_positive = static_cast<int>(g);
    acc += p[g];
    if (u < acc && p[g] > 0) return static_cast<int>(g);
  }
  return last_positive;
}

int sample_categorical(const Eigen::VectorXd& p, RngStream& rng) {
  return sample_categorical(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), rng);
}

int sample_categorical_log(const Eigen::VectorXd& log_p, RngStream& rng) {
  const double m = log_p.maxCoeff();
  require(std::isfinite(m), ErrorKind::numeric_failure, "all categorical log-probabilities are -inf");
  Eigen::VectorXd p = (log_p.array() - m).exp();
  return sample_categorical(p, rng);
}

namespace {

Eigen::LLT<Eigen::MatrixXd> factor_with_retry(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-8 * std::abs(a.trace()) / static_cast<double>(a.rows());
  Eigen::MatrixXd b = a;
  b.diagonal().array() += jitter;
  llt.compute(b);
  require(llt.info() == Eigen::Success, ErrorKind::numeric_failure, "matrix not positive definite after jitter");
  return llt;
}

}  // namespace

Eigen::VectorXd sample_normal_canonical(const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear,
                                        RngStream& rng) {
  const Eigen::MatrixXd sym = 0.5 * (precision + precision.transpose());
  auto llt = factor_with_retry(sym);
  Eigen::VectorXd mean = llt.solve(linear);
  Eigen::VectorXd z(linear.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  // precision = L L'  =>  L'^{-1} z has covariance precision^{-1}
  return mean + llt.matrixU().solve(z);
}

Eigen::VectorXd sample_normal_chol(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_lower, RngStream& rng) {
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + chol_lower.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd sample_normal_cov(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RngStream& rng) {
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  auto llt = factor_with_retry(sym);
  return sample_normal_chol(mean, llt.matrixL(), rng);
}

// ---------------------------------------------------------------------------
// GIG generators. Standardized form: density of y proportional to
// y^{lambda-1} exp(-omega (y + 1/y) / 2), lambda >= 0, x = alpha * y.

namespace {

double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

double gig_rou_noshift(double lambda, double omega, RngStream& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (;;) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

double gig_rou_shift(double lambda, double omega, RngStream& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  // extrema of (x - xm) sqrt(f(x)): roots of a cubic, solved with Cardano
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = (2.0 * (lambda - 1.0) * xm / omega - 1.0);
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * kPi) - a / 3.0;
  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);
  for (;;) {
    const double u = uminus + rng.uniform() * (uplus - uminus);
    const double v = rng.uniform();
    const double x = u / v + xm;
    if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Rejection from a three-piece hat; for lambda < 1 and small omega where the
// ratio-of-uniforms rectangles become inefficient.
double gig_small_omega(double lambda, double omega, RngStream& rng) {
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  double area[3];
  double k1;
  double k2;
  area[0] = k0 * x0;
  if (x0 >= 2.0 / omega) {
    k1 = 0.0;
    area[1] = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    area[1] = (lambda == 0.0) ? k1 * std::log(2.0 / (omega * omega))
                              : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = area[0] + area[1] + area[2];
  for (;;) {
    double v = total * rng.uniform();
    double x;
    double hx;
    if (v <= area[0]) {
      x = x0 * v / area[0];
      hx = k0;
    } else if ((v -= area[0]) <= area[1]) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + (lambda / k1 * v), 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= area[1];
      const double lo = std::max(x0, 2.0 / omega);
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = rng.uniform() * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
  }
}

}  // namespace

double sample_gig(double a, double b, double c, RngStream& rng) {
  require(std::isfinite(a) && std::isfinite(b) && std::isfinite(c), ErrorKind::invalid_parameter,
          "GIG parameters must be finite");
  require(b > 0, ErrorKind::invalid_parameter, "GIG requires b > 0");
  require(c >= 0, ErrorKind::invalid_parameter, "GIG requires c >= 0");
  if (c == 0.0) {
    require(a > 0, ErrorKind::invalid_parameter, "GIG with c = 0 requires a > 0");
    return sample_gamma(a, 0.5 * b, rng);
  }
  const double lambda = std::abs(a);
  const double omega = std::sqrt(b * c);
  const double alpha = std::sqrt(c / b);
  double y;
  if (lambda > 2.0 || omega > 3.0) {
    y = gig_rou_shift(lambda, omega, rng);
  } else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
    y = gig_rou_noshift(lambda, omega, rng);
  } else {
    y = gig_small_omega(lambda, omega, rng);
  }
  return a < 0 ? alpha / y : alpha * y;
}

double sample_gig_clamped(double a, double b, double c, RngStream& rng) {
  if (a <= 0.0) {
    const double floor = 1e-16 * b;
    if (c < floor) {
      c = floor;
      g_gig_clamps.fetch_add(1, std::memory_order_relaxed);
    }
  }
  return sample_gig(a, b, c, rng);
}

std::uint64_t gig_clamp_count() { return g_gig_clamps.load(std::memory_order_relaxed); }
void reset_gig_clamp_count() { g_gig_clamps.store(0, std::memory_order_relaxed); }

// ---------------------------------------------------------------------------
// Bessel K

namespace {

struct BesselBase {
  double log_k_mu;  // log K_mu(x)
  double ratio;     // K_{mu+1}(x) / K_mu(x)
};

// |mu| <= 1/2
BesselBase bessel_k_base(double mu, double x) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int max_iter = 100000;
  const double mu2 = mu * mu;
  if (x < 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = kPi * mu;
    const double fact = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
    // 1/Gamma(1 +- mu) and the Temme combinations, accurate for mu -> 0
    const double g_plus = boost::math::tgamma1pm1(mu);
    const double g_minus = boost::math::tgamma1pm1(-mu);
    const double gampl = 1.0 / (1.0 + g_plus);
    const double gammi = 1.0 / (1.0 + g_minus);
    const double gam2 = 0.5 * (gammi + gampl);
    const double gam1 = mu == 0.0 ? -std::numbers::egamma : (g_plus - g_minus) / (2.0 * mu) * gampl * gammi;
    double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    for (int i = 1; i <= max_iter; ++i) {
      ff = (i * ff + p + q) / (i * i - mu2);
      c *= d / i;
      p /= (i - mu);
      q /= (i + mu);
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    return {std::log(sum), sum1 * (2.0 / x) / sum};
  }
  // Steed's continued fraction (CF2), kept exponentially scaled.
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < max_iter; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  h = a1 * h;
  const double log_k = 0.5 * std::log(kPi / (2.0 * x)) - x - std::log(s);
  return {log_k, (mu + x + 0.5 - h) / x};
}

}  // namespace

double log_bessel_k(double nu, double x) {
  require(x > 0 && !std::isnan(x), ErrorKind::domain_error, "log_bessel_k requires x > 0");
  require(std::isfinite(nu), ErrorKind::invalid_parameter, "log_bessel_k requires finite order");
  nu = std::abs(nu);
  if (x < 1e-100) {
    // leading small-argument term
    if (nu == 0.0) return std::log(-std::log(0.5 * x) - std::numbers::egamma);
    return std::lgamma(nu) + (nu - 1.0) * std::log(2.0) - nu * std::log(x);
  }
  const int n = static_cast<int>(std::floor(nu + 0.5));
  const double mu = nu - n;
  auto base = bessel_k_base(mu, x);
  double log_k = base.log_k_mu;
  double ratio = base.ratio;
  for (int i = 1; i <= n; ++i) {
    log_k += std::log(ratio);
    ratio = 2.0 * (mu + i) / x + 1.0 / ratio;
  }
  return log_k;
}

double gig_mean(double a, double b, double c) {
  const double w = std::sqrt(b * c);
  return std::sqrt(c / b) * std::exp(log_bessel_k(a + 1.0, w) - log_bessel_k(a, w));
}

double gig_second_moment(double a, double b, double c) {
  const double w = std::sqrt(b * c);
  return (c / b) * std::exp(log_bessel_k(a + 2.0, w) - log_bessel_k(a, w));
}

double ng_marginal_logdensity(std::span<const double> mu_block, double mu0, double range_sq, double nu1, double nu2) {
  require(range_sq > 0, ErrorKind::invalid_parameter, "R2 must be positive");
  require(nu1 > 0 && nu2 > 0, ErrorKind::invalid_parameter, "nu1, nu2 must be positive");
  require(!mu_block.empty(), ErrorKind::invalid_parameter, "empty cluster-center block");
  const double g = static_cast<double>(mu_block.size());
  double e = 0;
  for (double m : mu_block) e += (m - mu0) * (m - mu0);
  e /= range_sq;
  const double d = 2.0 * nu2;
  const double p = nu1 - g / 2.0;
  const double head = nu1 * std::log(nu2) - std::lgamma(nu1) - 0.5 * g * std::log(2.0 * kPi) -
                      0.5 * g * std::log(range_sq);
  if (e == 0.0) {
    // 2 K_p(sqrt(de)) (e/d)^{p/2} -> Gamma(p) 2^p d^{-p} for p > 0, diverges otherwise
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    return head + std::lgamma(p) + p * std::log(2.0) - p * std::log(d);
  }
  return head + std::log(2.0) + log_bessel_k(p, std::sqrt(d * e)) + 0.5 * p * (std::log(e) - std::log(d));
}

double log_normal_pdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * (std::log(2.0 * kPi * var) + r * r / var);
}

double log_gamma_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace pvarmix
