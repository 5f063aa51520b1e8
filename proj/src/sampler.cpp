#include "pvarmix/sampler.hpp"

#include "pvarmix/config.hpp"
#include "pvarmix/error.hpp"
#include "pvarmix/factor_sv.hpp"
#include "pvarmix/mixture.hpp"
#include "pvarmix/shrinkage.hpp"
#include "pvarmix/var_regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pvarmix {

namespace {

struct Dims {
  int N, M, P, K, d_dom, d_for, m, k;
  Dims(int n, int mm, int p)
      : N(n), M(mm), P(p), K(n * mm), d_dom(mm * p + 1), d_for((n - 1) * mm * p), m(mm * (mm * p + 1)),
        k(mm * (n - 1) * mm * p) {}
};

// Lag-slot index (column of A minus the intercept) of domestic slot r >= 1.
int domestic_lag_slot(const Dims& d, int i, int r) {
  const int p = (r - 1) / d.M;
  const int v = (r - 1) % d.M;
  return p * d.K + i * d.M + v;
}

int foreign_lag_slot(const Dims& d, int i, int r) {
  const int per_lag = (d.N - 1) * d.M;
  const int p = r / per_lag;
  const int rem = r % per_lag;
  const int slot = rem / d.M;
  const int v = rem % d.M;
  const int c = slot < i ? slot : slot + 1;
  return p * d.K + c * d.M + v;
}

EquationPrior equation_prior(const ParameterState& s, const ModelConfig& cfg, const Dims& d, int i, int j) {
  EquationPrior pr;
  pr.mean = Eigen::VectorXd::Zero(d.d_dom + d.d_for);
  pr.var.resize(d.d_dom + d.d_for);
  const int n = i * d.M + j;
  if (cfg.prior == PriorKind::mixture) {
    const int g = s.mix.delta[static_cast<std::size_t>(i)];
    pr.mean.head(d.d_dom) = s.mix.mu.col(g).segment(j * d.d_dom, d.d_dom);
    pr.var.head(d.d_dom) = s.mix.V.segment(j * d.d_dom, d.d_dom);
    for (int r = 0; r < d.d_for; ++r) pr.var[d.d_dom + r] = ng_prior_var(s.shrink.tau2(i, j * d.d_for + r));
  } else {
    pr.var[0] = cfg.intercept_var;
    for (int r = 1; r < d.d_dom; ++r) pr.var[r] = ng_prior_var(s.shrink.tau2(n, domestic_lag_slot(d, i, r)));
    for (int r = 0; r < d.d_for; ++r) pr.var[d.d_dom + r] = ng_prior_var(s.shrink.tau2(n, foreign_lag_slot(d, i, r)));
  }
  return pr;
}

Eigen::MatrixXd domestic_matrix(const ParameterState& s) {
  const int N = s.N();
  Eigen::MatrixXd c(s.C[0].size(), N);
  for (int i = 0; i < N; ++i) c.col(i) = domestic_vector(s, i);
  return c;
}

void step_coefficients(ParameterState& s, const PanelData& panel, const ModelConfig& cfg, const Dims& d,
                       RngStream& rng) {
  const int Te = panel.T() - d.P;
  Eigen::MatrixXd X(Te, d.d_dom + d.d_for);
  for (int i = 0; i < d.N; ++i) {
    if (!cfg.likelihood_free) {
      const Design des = build_design(panel, i, d.P);
      X << des.domestic, des.foreign;
    }
    for (int j = 0; j < d.M; ++j) {
      const int n = i * d.M + j;
      const EquationPrior pr = equation_prior(s, cfg, d, i, j);
      Eigen::VectorXd b;
      if (cfg.likelihood_free) {
        b = pr.mean + pr.var.cwiseSqrt().cwiseProduct(
                          Eigen::VectorXd::NullaryExpr(pr.mean.size(), [&] { return rng.normal(); }));
      } else {
        Eigen::VectorXd y = panel.Y.col(n).tail(Te);
        if (s.q() > 0) y -= s.F * s.L.row(n).transpose();
        b = draw_equation_coeffs(X, y, s.Omega.col(n), pr, rng);
      }
      s.C[static_cast<std::size_t>(i)].row(j) = b.head(d.d_dom).transpose();
      s.B[static_cast<std::size_t>(i)].row(j) = b.tail(d.d_for).transpose();
    }
  }
}

void step_factor_sv(ParameterState& s, const PanelData& panel, const ModelConfig& cfg, const Dims& d,
                    RngStream& rng, SweepStats* stats) {
  const int q = s.q();
  const SVPrior svp = SVPrior::from_config(cfg);
  const int Te = static_cast<int>(s.Omega.rows());
  if (cfg.likelihood_free) {
    for (int n = 0; n < d.K; ++n) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(q);
      const int free = std::min(n, q);
      if (n < q) row[n] = 1.0;
      for (int c = 0; c < free; ++c) row[c] = std::sqrt(cfg.loading_var) * rng.normal();
      s.L.row(n) = row;
    }
    for (int f = 0; f < q; ++f) {
      s.sv_factor[static_cast<std::size_t>(f)] = draw_sv_prior(svp, rng);
      s.H.col(f) = simulate_logvol_path(s.sv_factor[static_cast<std::size_t>(f)], Te, rng);
      for (int t = 0; t < Te; ++t) s.F(t, f) = std::exp(0.5 * s.H(t, f)) * rng.normal();
    }
    for (int n = 0; n < d.K; ++n) {
      s.sv_idio[static_cast<std::size_t>(n)] = draw_sv_prior(svp, rng);
      s.Omega.col(n) = simulate_logvol_path(s.sv_idio[static_cast<std::size_t>(n)], Te, rng);
    }
    return;
  }
  const Eigen::MatrixXd E = residuals(s, panel, d.P);
  // 1b loadings
  if (q > 0) {
    for (int n = 0; n < d.K; ++n) s.L.row(n) = draw_loadings(n, s.F, E.col(n), s.Omega.col(n), cfg.loading_var, rng);
    // 1c factors
    for (int t = 0; t < Te; ++t) {
      s.F.row(t) = draw_factors(s.L, s.H.row(t).transpose(), s.Omega.row(t).transpose(), E.row(t).transpose(), rng)
                       .transpose();
    }
  }
  // 1d log-volatilities and their AR(1) parameters
  auto update = [&](Eigen::Ref<Eigen::VectorXd> path, SVParams& par, const Eigen::VectorXd& y) {
    bool acc = false;
    Eigen::VectorXd h = draw_logvol_path(y, par, path, rng, &acc);
    if (stats) {
      ++stats->path_proposed;
      stats->path_accepted += acc ? 1 : 0;
    }
    par = draw_sv_params(h, y, par, svp, rng);
    path = h;
  };
  for (int f = 0; f < q; ++f) update(s.H.col(f), s.sv_factor[static_cast<std::size_t>(f)], s.F.col(f));
  const Eigen::MatrixXd U = q > 0 ? Eigen::MatrixXd(E - s.F * s.L.transpose()) : E;
  for (int n = 0; n < d.K; ++n) update(s.Omega.col(n), s.sv_idio[static_cast<std::size_t>(n)], U.col(n));
}

void step_mixture(ParameterState& s, const ModelConfig& cfg, RngStream& rng, SweepStats* stats) {
  MixtureState& mx = s.mix;
  const int G = mx.G();
  const Eigen::MatrixXd c = domestic_matrix(s);
  mx.w = draw_weights(mx.delta, G, mx.p0, rng, &mx.log_w);                  // 2a
  mx.delta = draw_indicators(c, mx.log_w, mx.mu, mx.V, rng);               // 2b
  mx.mu = draw_group_means(c, mx.delta, mx.V, mx.mu0, mx.Q0(), G, rng);    // 2c
  mx.V = draw_common_variance(c, mx.delta, mx.mu, cfg.w0, cfg.w1, rng);    // 2d
  mx.range_sq = cfg.fixed_range > 0 ? Eigen::VectorXd::Constant(c.rows(), cfg.fixed_range) : squared_range(c);
  mx.lambda = draw_lambda(mx.mu, mx.mu0, mx.range_sq, cfg.nu1, cfg.nu2, rng);  // 2e, Q0 follows
  mx.mu0 = draw_mu0(mx.mu, mx.Q0(), rng, cfg.mu0_prior_var);               // 2f
  if (cfg.sample_p0) {                                                     // 2g
    const P0Draw r = draw_p0(mx.log_w, mx.p0, cfg.c0, mx.p0_tuning, rng);
    mx.p0 = r.p0;
    if (stats) {
      ++stats->p0_proposed;
      stats->p0_accepted += r.accepted ? 1 : 0;
    }
  }
}

void step_shrinkage(ParameterState& s, const ModelConfig& cfg, const Dims& d, RngStream& rng) {
  const NGHyper hyper{cfg.cc0, cfg.cc1, cfg.vartheta, cfg.xi_rate_literal};
  ShrinkageState& sh = s.shrink;
  if (cfg.prior == PriorKind::mixture) {
    if (d.k == 0) {
      for (int i = 0; i < d.N; ++i) sh.xi[i] = sample_gamma(cfg.cc0, cfg.cc1, rng);
      return;
    }
    for (int i = 0; i < d.N; ++i) sh.xi[i] = draw_xi(sh.tau2.row(i).transpose(), hyper, rng);
    for (int i = 0; i < d.N; ++i) {
      const auto& Bi = s.B[static_cast<std::size_t>(i)];
      for (int j = 0; j < d.M; ++j)
        for (int r = 0; r < d.d_for; ++r)
          sh.tau2(i, j * d.d_for + r) = draw_tau(Bi(j, r), sh.xi[i], cfg.vartheta, rng);
    }
  } else {
    const Eigen::MatrixXd A = full_coefficients(s, d.P);
    for (int p = 0; p < d.P; ++p) {
      const Eigen::MatrixXd blk = sh.tau2.middleCols(p * d.K, d.K);
      sh.xi[p] = draw_xi(Eigen::Map<const Eigen::VectorXd>(blk.data(), blk.size()), hyper, rng);
    }
    for (int p = 0; p < d.P; ++p)
      for (int n = 0; n < d.K; ++n)
        for (int c = 0; c < d.K; ++c)
          sh.tau2(n, p * d.K + c) = draw_tau(A(n, 1 + p * d.K + c), sh.xi[p], cfg.vartheta, rng);
  }
}

}  // namespace

void gibbs_sweep(ParameterState& state, const PanelData& panel, const ModelConfig& cfg, RngStream& rng,
                 SweepStats* stats, int sweep_index) {
  const Dims d(panel.N(), panel.M(), cfg.P);
  try {
    step_coefficients(state, panel, cfg, d, rng);
    step_factor_sv(state, panel, cfg, d, rng, stats);
    if (cfg.prior == PriorKind::mixture) step_mixture(state, cfg, rng, stats);
    step_shrinkage(state, cfg, d, rng);
    if (cfg.prior == PriorKind::mixture) permute_labels(state.mix, rng);
  } catch (const Error& e) {
    if (sweep_index < 0) throw;
    throw Error(e.kind(), "sweep " + std::to_string(sweep_index) + ": " + e.what());
  }
}

namespace {

std::vector<int> kmeans(const Eigen::MatrixXd& x, int groups, RngStream& rng) {
  const Eigen::Index n = x.cols();
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  if (groups <= 1 || n == 0) return assign;
  Eigen::MatrixXd centers(x.rows(), groups);
  // k-means++ seeding
  centers.col(0) = x.col(std::min<Eigen::Index>(static_cast<Eigen::Index>(rng.uniform() * n), n - 1));
  Eigen::VectorXd dist(n);
  for (int g = 1; g < groups; ++g) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int h = 0; h < g; ++h) best = std::min(best, (x.col(i) - centers.col(h)).squaredNorm());
      dist[i] = best;
    }
    const int pick = dist.sum() > 0 ? sample_categorical(dist, rng) : g % static_cast<int>(n);
    centers.col(g) = x.col(pick);
  }
  for (int it = 0; it < 50; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int g = 0; g < groups; ++g) {
        const double dd = (x.col(i) - centers.col(g)).squaredNorm();
        if (dd < bd) {
          bd = dd;
          best = g;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) changed = true;
      assign[static_cast<std::size_t>(i)] = best;
    }
    for (int g = 0; g < groups; ++g) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.rows());
      int cnt = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (assign[static_cast<std::size_t>(i)] == g) {
          sum += x.col(i);
          ++cnt;
        }
      if (cnt > 0) centers.col(g) = sum / cnt;
    }
    if (!changed && it > 0) break;
  }
  return assign;
}

double log_variance(const Eigen::VectorXd& v) {
  const double m = v.mean();
  const double var = (v.array() - m).square().mean();
  return std::log(std::max(var, 1e-300));
}

}  // namespace

ParameterState initialize_state(const PanelData& panel, const ModelConfig& cfg, RngStream& rng) {
  panel.validate();
  cfg.validate(panel.K());
  const Dims d(panel.N(), panel.M(), cfg.P);
  const int Te = panel.T() - cfg.P;
  require(Te > d.d_dom, ErrorKind::dimension_mismatch, "too few observations for the lag length");
  const int q = cfg.q;
  for (int n = 0; n < d.K; ++n) {
    const auto col = panel.Y.col(n).tail(Te);
    require(col.maxCoeff() > col.minCoeff(), ErrorKind::numeric_failure,
            "degenerate panel: series " + std::to_string(n) + " is constant");
  }
  ParameterState s;
  s.C.assign(static_cast<std::size_t>(d.N), Eigen::MatrixXd::Zero(d.M, d.d_dom));
  s.B.assign(static_cast<std::size_t>(d.N), Eigen::MatrixXd::Zero(d.M, d.d_for));

  // ridge least squares per equation
  for (int i = 0; i < d.N; ++i) {
    const Design des = build_design(panel, i, cfg.P);
    Eigen::MatrixXd X(Te, d.d_dom + d.d_for);
    X << des.domestic, des.foreign;
    Eigen::MatrixXd XtX = X.transpose() * X;
    const double ridge = 1e-6 * XtX.trace() / static_cast<double>(XtX.rows()) + 1e-12;
    XtX.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(XtX);
    require(llt.info() == Eigen::Success, ErrorKind::numeric_failure, "degenerate panel in initialization");
    for (int j = 0; j < d.M; ++j) {
      const Eigen::VectorXd b = llt.solve(X.transpose() * panel.Y.col(i * d.M + j).tail(Te));
      require(b.allFinite(), ErrorKind::numeric_failure, "degenerate panel in initialization");
      s.C[static_cast<std::size_t>(i)].row(j) = b.head(d.d_dom).transpose();
      s.B[static_cast<std::size_t>(i)].row(j) = b.tail(d.d_for).transpose();
    }
  }
  const Eigen::MatrixXd E = residuals(s, panel, cfg.P);

  // factors from principal components with the identification block enforced
  s.L = Eigen::MatrixXd::Zero(d.K, q);
  s.F = Eigen::MatrixXd::Zero(Te, q);
  if (q > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E.transpose() * E);
    const Eigen::MatrixXd V = es.eigenvectors().rightCols(q).rowwise().reverse();
    const Eigen::MatrixXd F0 = E * V;
    const Eigen::MatrixXd U = V.topRows(q);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(U);
    if (lu.isInvertible() && std::abs(lu.determinant()) > 1e-6) {
      s.L = V * lu.inverse();
      s.F = F0 * U.transpose();
    } else {
      s.L.topRows(q).setIdentity();
    }
    for (int r = 0; r < q; ++r)
      for (int c = r; c < q; ++c) s.L(r, c) = r == c ? 1.0 : 0.0;
  }
  const Eigen::MatrixXd Uid = q > 0 ? Eigen::MatrixXd(E - s.F * s.L.transpose()) : E;
  s.H.resize(Te, q);
  s.Omega.resize(Te, d.K);
  s.sv_factor.assign(static_cast<std::size_t>(q), SVParams{});
  s.sv_idio.assign(static_cast<std::size_t>(d.K), SVParams{});
  for (int f = 0; f < q; ++f) {
    const double lv = log_variance(s.F.col(f));
    s.H.col(f).setConstant(lv);
    s.sv_factor[static_cast<std::size_t>(f)] = SVParams{lv, 0.5, 0.1};
  }
  for (int n = 0; n < d.K; ++n) {
    const double lv = log_variance(Uid.col(n));
    s.Omega.col(n).setConstant(lv);
    s.sv_idio[static_cast<std::size_t>(n)] = SVParams{lv, 0.5, 0.1};
  }

  // mixture
  if (cfg.prior == PriorKind::mixture) {
    MixtureState& mx = s.mix;
    const int G = cfg.G;
    const Eigen::MatrixXd c = domestic_matrix(s);
    mx.range_sq = cfg.fixed_range > 0 ? Eigen::VectorXd::Constant(d.m, cfg.fixed_range) : squared_range(c);
    const Eigen::MatrixXd cs = mx.range_sq.cwiseSqrt().cwiseInverse().asDiagonal() * c;
    mx.delta = kmeans(cs, std::min(G, d.N), rng);
    const auto cnt = [&] {
      std::vector<int> n(static_cast<std::size_t>(G), 0);
      for (int g : mx.delta) ++n[static_cast<std::size_t>(g)];
      return n;
    }();
    mx.mu0.resize(d.m);
    for (int j = 0; j < d.m; ++j) {
      std::vector<double> row(static_cast<std::size_t>(d.N));
      for (int i = 0; i < d.N; ++i) row[static_cast<std::size_t>(i)] = c(j, i);
      std::sort(row.begin(), row.end());
      const std::size_t h = row.size() / 2;
      mx.mu0[j] = row.size() % 2 ? row[h] : 0.5 * (row[h - 1] + row[h]);
    }
    mx.mu = mx.mu0.replicate(1, G);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(d.m, G);
    for (int i = 0; i < d.N; ++i) sums.col(mx.delta[static_cast<std::size_t>(i)]) += c.col(i);
    for (int g = 0; g < G; ++g)
      if (cnt[static_cast<std::size_t>(g)] > 0) mx.mu.col(g) = sums.col(g) / cnt[static_cast<std::size_t>(g)];
    mx.V.resize(d.m);
    for (int j = 0; j < d.m; ++j) {
      double ss = 0.0;
      for (int i = 0; i < d.N; ++i) {
        const double r = c(j, i) - mx.mu(j, mx.delta[static_cast<std::size_t>(i)]);
        ss += r * r;
      }
      mx.V[j] = std::max(ss / d.N, 1e-4 * mx.range_sq[j]) + 1e-10;
    }
    mx.lambda = Eigen::VectorXd::Ones(d.m);
    mx.p0 = 1.0 / G;
    mx.p0_tuning = cfg.p0_tuning;
    mx.w.resize(G);
    for (int g = 0; g < G; ++g) mx.w[g] = (cnt[static_cast<std::size_t>(g)] + mx.p0) / (d.N + G * mx.p0);
    mx.log_w = mx.w.array().log();
    s.shrink.xi = Eigen::VectorXd::Ones(d.N);
    s.shrink.tau2 = Eigen::MatrixXd::Ones(d.N, d.k);
  } else {
    s.shrink.xi = Eigen::VectorXd::Ones(cfg.P);
    s.shrink.tau2 = Eigen::MatrixXd::Ones(d.K, d.K * cfg.P);
  }
  validate_state(s, cfg);
  return s;
}

ParameterState resize_paths(const ParameterState& s, int t_eff) {
  ParameterState out = s;
  auto stretch = [t_eff](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd r(t_eff, m.cols());
    const Eigen::Index keep = std::min<Eigen::Index>(t_eff, m.rows());
    r.topRows(keep) = m.topRows(keep);
    for (Eigen::Index t = keep; t < t_eff; ++t) {
      if (m.rows() > 0) {
        r.row(t) = m.row(m.rows() - 1);
      } else {
        r.row(t).setZero();
      }
    }
    return r;
  };
  out.F = stretch(s.F);
  out.F.bottomRows(std::max<Eigen::Index>(0, t_eff - s.F.rows())).setZero();
  out.H = stretch(s.H);
  out.Omega = stretch(s.Omega);
  return out;
}

void declare_blocks(DrawStore& store, const ParameterState& s, const ModelConfig& cfg) {
  const int N = s.N();
  const int M = s.M();
  const int K = N * M;
  const int q = s.q();
  const int P = cfg.P;
  store.add_block("coefficients", {K, 1 + K * P});
  store.add_block("loadings", {K, q});
  store.add_block("sv_factor", {q, 3});
  store.add_block("sv_idio", {K, 3});
  store.add_block("logvar_factor_last", {q});
  store.add_block("logvar_idio_last", {K});
  if (cfg.prior == PriorKind::mixture) {
    const int m = M * (M * P + 1);
    const int G = cfg.G;
    store.add_block("mixture_w", {G});
    store.add_block("mixture_delta", {N});
    store.add_block("mixture_mu", {m, G});
    store.add_block("mixture_V", {m});
    store.add_block("mixture_lambda", {m});
    store.add_block("mixture_mu0", {m});
    store.add_block("mixture_range_sq", {m});
    store.add_block("mixture_p0", {1});
  }
  store.add_block("shrink_xi", {static_cast<int>(s.shrink.xi.size())});
  store.add_block("shrink_tau2", {static_cast<int>(s.shrink.tau2.rows()), static_cast<int>(s.shrink.tau2.cols())});
  if (cfg.store_paths) {
    const int Te = static_cast<int>(s.Omega.rows());
    store.add_block("path_h", {Te, q});
    store.add_block("path_omega", {Te, K});
    store.add_block("path_f", {Te, q});
  }
}

void record_draw(DrawStore& store, const ParameterState& s, const ModelConfig& cfg) {
  store.append("coefficients", full_coefficients(s, cfg.P));
  store.append("loadings", s.L);
  auto sv_table = [](const std::vector<SVParams>& v) {
    Eigen::MatrixXd t(static_cast<Eigen::Index>(v.size()), 3);
    for (std::size_t r = 0; r < v.size(); ++r) t.row(static_cast<Eigen::Index>(r)) << v[r].phi, v[r].rho, v[r].sigma;
    return t;
  };
  store.append("sv_factor", sv_table(s.sv_factor));
  store.append("sv_idio", sv_table(s.sv_idio));
  const Eigen::Index Te = s.Omega.rows();
  store.append("logvar_factor_last", Te > 0 ? Eigen::MatrixXd(s.H.row(Te - 1)) : Eigen::MatrixXd::Zero(1, s.q()));
  store.append("logvar_idio_last", Te > 0 ? Eigen::MatrixXd(s.Omega.row(Te - 1)) : Eigen::MatrixXd::Zero(1, 0));
  if (cfg.prior == PriorKind::mixture) {
    const MixtureState& mx = s.mix;
    store.append("mixture_w", mx.w);
    Eigen::VectorXd del(static_cast<Eigen::Index>(mx.delta.size()));
    for (std::size_t i = 0; i < mx.delta.size(); ++i) del[static_cast<Eigen::Index>(i)] = mx.delta[i];
    store.append("mixture_delta", del);
    store.append("mixture_mu", mx.mu);
    store.append("mixture_V", mx.V);
    store.append("mixture_lambda", mx.lambda);
    store.append("mixture_mu0", mx.mu0);
    store.append("mixture_range_sq", mx.range_sq);
    store.append("mixture_p0", &mx.p0, 1);
  }
  store.append("shrink_xi", s.shrink.xi);
  store.append("shrink_tau2", s.shrink.tau2);
  if (cfg.store_paths) {
    store.append("path_h", s.H);
    store.append("path_omega", s.Omega);
    store.append("path_f", s.F);
  }
}

ChainResult run_chain(const PanelData& panel, const ModelConfig& cfg, const RunOptions& opts) {
  panel.validate();
  cfg.validate(panel.K());
  const std::uint64_t stream = chain_stream(opts);
  RngStream rng(cfg.seed, stream);
  ChainResult res;
  ParameterState state;
  if (opts.init) {
    state = resize_paths(*opts.init, panel.T() - cfg.P);
    state.mix.p0_tuning = cfg.p0_tuning;
  } else {
    state = initialize_state(panel, cfg, rng);
  }
  DrawStore& store = res.store;
  store.meta.model = opts.label;
  store.meta.config_hash = config_hash(cfg);
  store.meta.seed = cfg.seed;
  store.meta.stream = stream;
  store.meta.draws = cfg.draws;
  store.meta.burnin = cfg.burnin;
  store.meta.thin = cfg.thin;
  store.meta.N = panel.N();
  store.meta.M = panel.M();
  store.meta.P = cfg.P;
  store.meta.q = cfg.q;
  store.meta.G = cfg.prior == PriorKind::mixture ? cfg.G : 0;
  store.meta.countries = panel.countries;
  store.meta.variables = panel.variables;
  declare_blocks(store, state, cfg);

  const std::uint64_t clamps0 = gig_clamp_count();
  SweepStats batch;
  SweepStats post;
  constexpr int kAdaptBatch = 50;
  for (int it = 0; it < cfg.draws; ++it) {
    const bool burning = it < cfg.burnin;
    try {
      gibbs_sweep(state, panel, cfg, rng, burning ? &batch : &post, it);
    } catch (const Error&) {
      if (!opts.checkpoint_dir.empty()) store.save(opts.checkpoint_dir);
      throw;
    }
    if (burning && cfg.adapt_p0 && batch.p0_proposed >= kAdaptBatch) {
      const double rate = static_cast<double>(batch.p0_accepted) / batch.p0_proposed;
      state.mix.p0_tuning = adapt_p0_tuning(state.mix.p0_tuning, rate);
      batch.p0_accepted = batch.p0_proposed = 0;
    }
    if (opts.on_sweep) opts.on_sweep(it, state);
    if (!burning && (it - cfg.burnin + 1) % cfg.thin == 0) {
      if ((store.retained() % 100) == 0) validate_state(state, cfg);
      record_draw(store, state, cfg);
    }
  }
  res.stats = post;
  auto rate = [](int a, int b) { return b > 0 ? static_cast<double>(a) / b : 0.0; };
  store.meta.stats = {{"p0_acceptance", rate(post.p0_accepted, post.p0_proposed)},
                      {"p0_tuning", state.mix.p0_tuning},
                      {"logvol_path_acceptance", rate(post.path_accepted, post.path_proposed)},
                      {"gig_clamps", static_cast<double>(gig_clamp_count() - clamps0)}};
  res.final_state = std::move(state);
  return res;
}

std::uint64_t chain_stream(const RunOptions& opts) { return opts.stream ^ hash_label(opts.label); }

DrawStore run_chain(const PanelData& panel, const ModelConfig& cfg) { return run_chain(panel, cfg, RunOptions{}).store; }

double inefficiency_factor(const Eigen::VectorXd& draws) {
  const Eigen::Index n = draws.size();
  require(n >= 100, ErrorKind::insufficient_draws, "inefficiency factor needs at least 100 draws");
  const Eigen::ArrayXd x = draws.array() - draws.mean();
  const double c0 = x.square().sum() / static_cast<double>(n);
  require(c0 > 1e-300 * (1.0 + draws.cwiseAbs().maxCoeff()), ErrorKind::degenerate_input,
          "constant sequence has no autocorrelation");
  auto acf = [&](Eigen::Index lag) {
    return (x.head(n - lag) * x.tail(n - lag)).sum() / static_cast<double>(n) / c0;
  };
  double sum_pairs = 0.0;
  for (Eigen::Index k = 0; 2 * k + 1 < n; ++k) {
    const double gamma = (k == 0 ? 1.0 : acf(2 * k)) + acf(2 * k + 1);
    if (gamma <= 0.0) break;
    sum_pairs += gamma;
  }
  return -1.0 + 2.0 * sum_pairs;
}

ParameterState draw_from_prior(int N, int M, int t_eff, const ModelConfig& cfg, RngStream& rng) {
  require(cfg.prior == PriorKind::mixture && cfg.fixed_range > 0 && cfg.mu0_prior_var > 0,
          ErrorKind::invalid_parameter, "prior simulation needs the mixture prior with fixed range and proper mu0");
  const Dims d(N, M, cfg.P);
  const int q = cfg.q;
  const int G = cfg.G;
  const SVPrior svp = SVPrior::from_config(cfg);
  ParameterState s;
  s.C.assign(static_cast<std::size_t>(N), Eigen::MatrixXd::Zero(M, d.d_dom));
  s.B.assign(static_cast<std::size_t>(N), Eigen::MatrixXd::Zero(M, d.d_for));
  MixtureState& mx = s.mix;
  mx.p0 = cfg.sample_p0 ? sample_gamma(cfg.c0, cfg.c0 * G, rng) : 1.0 / G;
  mx.p0_tuning = cfg.p0_tuning;
  mx.log_w = sample_log_dirichlet(Eigen::VectorXd::Constant(G, mx.p0), rng);
  mx.w = mx.log_w.array().exp();
  mx.w /= mx.w.sum();
  mx.delta.resize(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) mx.delta[static_cast<std::size_t>(i)] = sample_categorical_log(mx.log_w, rng);
  mx.range_sq = Eigen::VectorXd::Constant(d.m, cfg.fixed_range);
  mx.mu0.resize(d.m);
  mx.lambda.resize(d.m);
  mx.V.resize(d.m);
  for (int j = 0; j < d.m; ++j) {
    mx.mu0[j] = std::sqrt(cfg.mu0_prior_var) * rng.normal();
    mx.lambda[j] = sample_gamma(cfg.nu1, cfg.nu2, rng);
  }
  const Eigen::VectorXd Q0 = mx.Q0();
  mx.mu.resize(d.m, G);
  for (int g = 0; g < G; ++g)
    for (int j = 0; j < d.m; ++j) mx.mu(j, g) = mx.mu0[j] + std::sqrt(Q0[j]) * rng.normal();
  for (int j = 0; j < d.m; ++j) mx.V[j] = sample_inverse_gamma(cfg.w0, cfg.w1, rng);
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd c = mx.mu.col(mx.delta[static_cast<std::size_t>(i)]);
    for (int j = 0; j < d.m; ++j) c[j] += std::sqrt(mx.V[j]) * rng.normal();
    set_domestic_vector(s, i, c);
  }
  s.shrink.xi.resize(N);
  s.shrink.tau2.resize(N, d.k);
  for (int i = 0; i < N; ++i) {
    s.shrink.xi[i] = sample_gamma(cfg.cc0, cfg.cc1, rng);
    for (int r = 0; r < d.k; ++r) {
      const double t2 = draw_tau_prior(s.shrink.xi[i], cfg.vartheta, rng);
      s.shrink.tau2(i, r) = t2;
      s.B[static_cast<std::size_t>(i)](r / d.d_for, r % d.d_for) = std::sqrt(t2) * rng.normal();
    }
  }
  s.L = Eigen::MatrixXd::Zero(d.K, q);
  for (int n = 0; n < d.K; ++n) {
    if (n < q) s.L(n, n) = 1.0;
    for (int c = 0; c < std::min(n, q); ++c) s.L(n, c) = std::sqrt(cfg.loading_var) * rng.normal();
  }
  s.sv_factor.resize(static_cast<std::size_t>(q));
  s.sv_idio.resize(static_cast<std::size_t>(d.K));
  s.H.resize(t_eff, q);
  s.F.resize(t_eff, q);
  s.Omega.resize(t_eff, d.K);
  for (int f = 0; f < q; ++f) {
    s.sv_factor[static_cast<std::size_t>(f)] = draw_sv_prior(svp, rng);
    s.H.col(f) = simulate_logvol_path(s.sv_factor[static_cast<std::size_t>(f)], t_eff, rng);
    for (int t = 0; t < t_eff; ++t) s.F(t, f) = std::exp(0.5 * s.H(t, f)) * rng.normal();
  }
  for (int n = 0; n < d.K; ++n) {
    s.sv_idio[static_cast<std::size_t>(n)] = draw_sv_prior(svp, rng);
    s.Omega.col(n) = simulate_logvol_path(s.sv_idio[static_cast<std::size_t>(n)], t_eff, rng);
  }
  return s;
}

PanelData simulate_from_state(const ParameterState& s, const PanelData& initial, int P, RngStream& rng) {
  const int Te = static_cast<int>(s.Omega.rows());
  const int K = initial.K();
  require(initial.T() >= P, ErrorKind::dimension_mismatch, "need P initial rows");
  PanelData out = initial;
  out.Y.conservativeResize(P + Te, K);
  out.dates.clear();
  const Eigen::MatrixXd A = full_coefficients(s, P);
  for (int t = P; t < P + Te; ++t) {
    Eigen::VectorXd y = A * lag_vector(out.Y, t, P);
    if (s.q() > 0) y += s.L * s.F.row(t - P).transpose();
    for (int n = 0; n < K; ++n) y[n] += std::exp(0.5 * s.Omega(t - P, n)) * rng.normal();
    out.Y.row(t) = y.transpose();
  }
  return out;
}

}  // namespace pvarmix
