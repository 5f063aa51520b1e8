#include "pvarmix/simlab.hpp"

#include "pvarmix/config.hpp"
#include "pvarmix/error.hpp"
#include "pvarmix/factor_sv.hpp"
#include "pvarmix/mixture.hpp"
#include "pvarmix/var_regression.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace pvarmix {

DgpSpec::DgpSpec() {
  Eigen::VectorXd mu1(6);
  Eigen::VectorXd mu2(6);
  mu1 << 2.0, 0.6, 0.2, -3.0, 0.3, 0.6;
  mu2 << 5.0, -0.6, 0.2, 0.0, -0.8, 0.6;
  mu_true = {mu1, mu2};
  w_true.resize(2);
  w_true << 0.4, 0.6;
}

DgpSpec DgpSpec::desk() {
  DgpSpec s;
  s.N = 10;
  s.replications = 10;
  return s;
}

void DgpSpec::validate() const {
  require(N >= 2 && M >= 1 && P >= 1 && T > P, ErrorKind::invalid_parameter, "DGP dimensions");
  require(G_true() >= 1 && w_true.size() == G_true(), ErrorKind::invalid_parameter, "one weight per component");
  for (const auto& m : mu_true)
    require(m.size() == M * (M * P + 1), ErrorKind::dimension_mismatch, "cluster center length must be M(MP+1)");
  require(std::abs(w_true.sum() - 1.0) < 1e-10 && (w_true.array() >= 0).all(), ErrorKind::invalid_parameter,
          "true weights must lie on the simplex");
  require(v_true >= 0 && b_var >= 0 && loading_var >= 0, ErrorKind::invalid_parameter, "variances must be >= 0");
  require(sparsity >= 0 && sparsity <= 1, ErrorKind::invalid_parameter, "sparsity in [0, 1]");
  require(q >= 0 && q <= N * M && burnin >= 0, ErrorKind::invalid_parameter, "q and burnin");
  require(std::abs(sv_h.rho) < 1 && std::abs(sv_omega.rho) < 1 && sv_h.sigma >= 0 && sv_omega.sigma >= 0,
          ErrorKind::invalid_parameter, "SV parameters");
}

Eigen::MatrixXd sparsify(const Eigen::MatrixXd& B, double varpi) {
  require(varpi >= 0 && varpi <= 1, ErrorKind::invalid_parameter, "sparsity fraction in [0, 1]");
  if (B.size() == 0) return B;
  const double thr = varpi * B.cwiseAbs().maxCoeff();
  return B.unaryExpr([thr](double b) { return std::abs(b) < thr ? 0.0 : b; });
}

void sparsify_blocks(std::vector<Eigen::MatrixXd>& B, double varpi) {
  require(varpi >= 0 && varpi <= 1, ErrorKind::invalid_parameter, "sparsity fraction in [0, 1]");
  double mx = 0.0;
  for (const auto& b : B)
    if (b.size() > 0) mx = std::max(mx, b.cwiseAbs().maxCoeff());
  const double thr = varpi * mx;
  for (auto& b : B) b = b.unaryExpr([thr](double v) { return std::abs(v) < thr ? 0.0 : v; });
}

double companion_radius(const Eigen::MatrixXd& A, int P) {
  const Eigen::Index K = A.rows();
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(K * P, K * P);
  comp.topRows(K) = A.rightCols(K * P);
  if (P > 1) comp.bottomLeftCorner(K * (P - 1), K * (P - 1)).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::pair<PanelData, DgpTruth> generate_dgp(const DgpSpec& spec, RngStream& rng) {
  spec.validate();
  const int N = spec.N;
  const int M = spec.M;
  const int P = spec.P;
  const int K = N * M;
  const int d_dom = M * P + 1;
  const int d_for = (N - 1) * M * P;
  DgpTruth truth;
  ParameterState& s = truth.state;
  s.C.assign(static_cast<std::size_t>(N), Eigen::MatrixXd::Zero(M, d_dom));
  s.B.assign(static_cast<std::size_t>(N), Eigen::MatrixXd::Zero(M, d_for));
  truth.w = spec.w_true;
  truth.mu.resize(spec.mu_true[0].size(), spec.G_true());
  for (int g = 0; g < spec.G_true(); ++g) truth.mu.col(g) = spec.mu_true[static_cast<std::size_t>(g)];
  truth.delta.resize(static_cast<std::size_t>(N));
  const double sv = std::sqrt(spec.v_true);
  for (int i = 0; i < N; ++i) {
    const int g = sample_categorical(spec.w_true, rng);
    truth.delta[static_cast<std::size_t>(i)] = g;
    Eigen::VectorXd c = truth.mu.col(g);
    for (Eigen::Index j = 0; j < c.size(); ++j) c[j] += sv * rng.normal();
    set_domestic_vector(s, i, c);
  }

  const double sb = std::sqrt(spec.b_var);
  for (int attempt = 0;; ++attempt) {
    require(attempt < 100, ErrorKind::non_stationary_dgp, "100 consecutive explosive foreign-coefficient draws");
    for (auto& b : s.B)
      for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = sb * rng.normal();
    sparsify_blocks(s.B, spec.sparsity);
    truth.A = full_coefficients(s, P);
    if (companion_radius(truth.A, P) < 0.99) {
      truth.redraws = attempt;
      break;
    }
  }

  const int total = spec.burnin + spec.T;
  const int q = spec.q;
  const double sl = std::sqrt(spec.loading_var);
  s.L.resize(K, q);
  for (Eigen::Index k = 0; k < s.L.size(); ++k) s.L.data()[k] = sl * rng.normal();
  s.sv_factor.assign(static_cast<std::size_t>(q), spec.sv_h);
  s.sv_idio.assign(static_cast<std::size_t>(K), spec.sv_omega);
  Eigen::MatrixXd H(total, q);
  Eigen::MatrixXd Om(total, K);
  Eigen::MatrixXd F(total, q);
  for (int f = 0; f < q; ++f) {
    H.col(f) = simulate_logvol_path(spec.sv_h, total, rng);
    for (int t = 0; t < total; ++t) F(t, f) = std::exp(0.5 * H(t, f)) * rng.normal();
  }
  for (int n = 0; n < K; ++n) Om.col(n) = simulate_logvol_path(spec.sv_omega, total, rng);

  // start at the unconditional mean
  Eigen::MatrixXd sumA = Eigen::MatrixXd::Identity(K, K);
  for (int p = 0; p < P; ++p) sumA -= truth.A.middleCols(1 + p * K, K);
  const Eigen::VectorXd ybar = sumA.partialPivLu().solve(truth.A.col(0));
  Eigen::MatrixXd Y(total + P, K);
  for (int p = 0; p < P; ++p) Y.row(p) = ybar.transpose();
  for (int t = 0; t < total; ++t) {
    Eigen::VectorXd y = truth.A * lag_vector(Y, t + P, P);
    if (!spec.zero_shocks) {
      if (q > 0) y += s.L * F.row(t).transpose();
      for (int n = 0; n < K; ++n) y[n] += std::exp(0.5 * Om(t, n)) * rng.normal();
    }
    Y.row(t + P) = y.transpose();
  }
  require(Y.allFinite(), ErrorKind::non_stationary_dgp, "simulated panel overflowed");

  PanelData panel;
  panel.Y = Y.bottomRows(spec.T);
  for (int i = 0; i < N; ++i) panel.countries.push_back("C" + std::to_string(i + 1));
  for (int j = 0; j < M; ++j) panel.variables.push_back(M == 2 ? (j == 0 ? "UN" : "DP") : "V" + std::to_string(j + 1));
  for (int t = 0; t < spec.T; ++t) {
    const int year = 2000 + t / 12;
    const int month = t % 12 + 1;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    panel.dates.emplace_back(buf);
  }
  // latent paths aligned with the modeled periods P..T-1 of the sample
  const int off = total - spec.T + P;
  s.H = H.bottomRows(total - off);
  s.F = F.bottomRows(total - off);
  s.Omega = Om.bottomRows(total - off);
  s.mix.delta = truth.delta;
  s.mix.mu = truth.mu;
  s.mix.w = truth.w;
  return {std::move(panel), std::move(truth)};
}

Eigen::MatrixXd fit_var_ols(const PanelData& panel, int P) {
  panel.validate();
  const int T = panel.T();
  const int K = panel.K();
  const int Te = T - P;
  require(Te > 1 + K * P, ErrorKind::numeric_failure, "singular design: fewer observations than regressors");
  Eigen::MatrixXd X(Te, 1 + K * P);
  for (int t = P; t < T; ++t) X.row(t - P) = lag_vector(panel.Y, t, P).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-13);
  require(qr.rank() == X.cols(), ErrorKind::numeric_failure, "singular design in least squares");
  return qr.solve(panel.Y.bottomRows(Te)).transpose();
}

DrawStore fit_var_ng(const PanelData& panel, ModelConfig cfg, const RunOptions& opts) {
  cfg.prior = PriorKind::lagwise_ng;
  return run_chain(panel, cfg, opts).store;
}

DrawStore fit_ar1_sv(const PanelData& panel, const ModelConfig& cfg, const RunOptions& opts) {
  panel.validate();
  cfg.validate(panel.K());
  const int T = panel.T();
  const int K = panel.K();
  const int P = cfg.P;
  const int Te = T - P;
  require(Te > 2, ErrorKind::dimension_mismatch, "series too short");
  RngStream rng(cfg.seed, chain_stream(opts));
  const SVPrior svp = SVPrior::from_config(cfg);

  struct Series {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd beta;
    Eigen::VectorXd omega;
    SVParams sv;
  };
  std::vector<Series> ser(static_cast<std::size_t>(K));
  EquationPrior prior{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, cfg.intercept_var)};
  for (int n = 0; n < K; ++n) {
    Series& s = ser[static_cast<std::size_t>(n)];
    const Eigen::VectorXd col = panel.Y.col(n);
    require((col.array() - col.mean()).abs().maxCoeff() > 0, ErrorKind::degenerate_input,
            "constant series " + std::to_string(n));
    s.X.resize(Te, 2);
    s.X.col(0).setOnes();
    s.X.col(1) = col.segment(P - 1, Te);
    s.y = col.tail(Te);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s.X);
    s.beta = qr.solve(s.y);
    const Eigen::VectorXd u = s.y - s.X * s.beta;
    const double lv = std::log(std::max(u.squaredNorm() / Te, 1e-300));
    s.omega = Eigen::VectorXd::Constant(Te, lv);
    s.sv = SVParams{lv, 0.5, 0.1};
  }

  DrawStore store;
  store.meta.model = opts.label;
  store.meta.config_hash = config_hash(cfg);
  store.meta.seed = cfg.seed;
  store.meta.stream = chain_stream(opts);
  store.meta.draws = cfg.draws;
  store.meta.burnin = cfg.burnin;
  store.meta.thin = cfg.thin;
  store.meta.N = panel.N();
  store.meta.M = panel.M();
  store.meta.P = P;
  store.meta.q = 0;
  store.meta.countries = panel.countries;
  store.meta.variables = panel.variables;
  store.add_block("coefficients", {K, 1 + K * P});
  store.add_block("loadings", {K, 0});
  store.add_block("sv_factor", {0, 3});
  store.add_block("sv_idio", {K, 3});
  store.add_block("logvar_factor_last", {0});
  store.add_block("logvar_idio_last", {K});
  int accepted = 0;
  int proposed = 0;
  for (int it = 0; it < cfg.draws; ++it) {
    for (auto& s : ser) {
      s.beta = draw_equation_coeffs(s.X, s.y, s.omega, prior, rng);
      const Eigen::VectorXd u = s.y - s.X * s.beta;
      bool acc = false;
      s.omega = draw_logvol_path(u, s.sv, s.omega, rng, &acc);
      s.sv = draw_sv_params(s.omega, u, s.sv, svp, rng);
      ++proposed;
      accepted += acc ? 1 : 0;
    }
    if (it >= cfg.burnin && (it - cfg.burnin + 1) % cfg.thin == 0) {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K, 1 + K * P);
      Eigen::MatrixXd svt(K, 3);
      Eigen::VectorXd last(K);
      for (int n = 0; n < K; ++n) {
        const Series& s = ser[static_cast<std::size_t>(n)];
        A(n, 0) = s.beta[0];
        A(n, 1 + n) = s.beta[1];
        svt.row(n) << s.sv.phi, s.sv.rho, s.sv.sigma;
        last[n] = s.omega[Te - 1];
      }
      store.append("coefficients", A);
      store.append("loadings", Eigen::MatrixXd(K, 0));
      store.append("sv_factor", Eigen::MatrixXd(0, 3));
      store.append("sv_idio", svt);
      store.append("logvar_factor_last", Eigen::MatrixXd(0, 1));
      store.append("logvar_idio_last", last);
    }
  }
  store.meta.stats = {{"logvol_path_acceptance", proposed ? static_cast<double>(accepted) / proposed : 0.0}};
  return store;
}

double coefficient_rmse(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& A_true) {
  require(estimate.rows() == A_true.rows() && estimate.cols() == A_true.cols(), ErrorKind::dimension_mismatch,
          "coefficient shapes differ");
  return std::sqrt((estimate - A_true).squaredNorm() / static_cast<double>(A_true.size()));
}

double coefficient_rmse(const DrawStore& store, const Eigen::MatrixXd& A_true) {
  return coefficient_rmse(store.median("coefficients"), A_true);
}

const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::pvar_mix: return "pvar_mix";
    case Estimator::pvar_g1: return "pvar_g1";
    case Estimator::var_ng: return "var_ng";
    case Estimator::var_ols: return "var_ols";
  }
  return "?";
}

Estimator parse_estimator(const std::string& s) {
  for (Estimator e : {Estimator::pvar_mix, Estimator::pvar_g1, Estimator::var_ng, Estimator::var_ols})
    if (s == estimator_name(e)) return e;
  fail(ErrorKind::config_error, "unknown estimator '" + s + "'");
}

MixtureDiagnostics mixture_diagnostics(const DrawStore& store, const std::vector<int>& delta_true,
                                       const Eigen::MatrixXd& mu_true, const Eigen::VectorXd& w_true,
                                       IdentScheme scheme, int coord) {
  const int D = store.retained();
  require(D > 0, ErrorKind::insufficient_draws, "no retained draws");
  const int N = static_cast<int>(delta_true.size());
  const auto& wb = store.block("mixture_w");
  const int G = wb.shape[0];
  const auto& mub = store.block("mixture_mu");
  const int m = mub.shape[0];
  require(store.block("mixture_delta").shape[0] == N && m == mu_true.rows(), ErrorKind::dimension_mismatch,
          "truth does not match the store");
  const auto tl = identified_labels(w_true, mu_true, delta_true, scheme, coord);
  std::vector<int> true_label(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) true_label[static_cast<std::size_t>(i)] = tl[static_cast<std::size_t>(delta_true[static_cast<std::size_t>(i)])];

  const auto Wt = store.table("mixture_w");
  const auto Dt = store.table("mixture_delta");
  const auto Mt = store.table("mixture_mu");
  const auto Lt = store.table("mixture_lambda");
  MixtureDiagnostics out;
  out.gstar_prob.assign(static_cast<std::size_t>(G), 0.0);
  out.alloc_prob.assign(static_cast<std::size_t>(N), 0.0);
  out.delta_mean = Eigen::VectorXd::Zero(N);
  std::vector<int> delta(static_cast<std::size_t>(N));
  for (int d = 0; d < D; ++d) {
    for (int i = 0; i < N; ++i) delta[static_cast<std::size_t>(i)] = static_cast<int>(Dt(d, i));
    const Eigen::VectorXd w = Wt.row(d).transpose();
    const Eigen::MatrixXd mu = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        Mt.row(d).data(), m, G);
    const auto lab = identified_labels(w, mu, delta, scheme, coord);
    const int gs = active_clusters(delta, G);
    out.gstar_prob[static_cast<std::size_t>(gs - 1)] += 1.0 / D;
    for (int i = 0; i < N; ++i) {
      const int l = lab[static_cast<std::size_t>(delta[static_cast<std::size_t>(i)])];
      out.delta_mean[i] += static_cast<double>(l) / D;
      if (l == true_label[static_cast<std::size_t>(i)]) out.alloc_prob[static_cast<std::size_t>(i)] += 1.0 / D;
    }
  }
  out.gstar_mode = 1 + static_cast<int>(std::max_element(out.gstar_prob.begin(), out.gstar_prob.end()) -
                                        out.gstar_prob.begin());
  out.qps = qps(true_label, out.delta_mean);
  out.log_lambda_median.resize(m);
  std::vector<double> col(static_cast<std::size_t>(D));
  for (int j = 0; j < m; ++j) {
    for (int d = 0; d < D; ++d) col[static_cast<std::size_t>(d)] = std::log(Lt(d, j));
    std::nth_element(col.begin(), col.begin() + D / 2, col.end());
    out.log_lambda_median[j] = col[static_cast<std::size_t>(D / 2)];
  }
  if (D >= 100) {
    const auto At = store.table("coefficients");
    const auto& cb = store.block("coefficients");
    const int K = cb.shape[0];
    const int cols = cb.shape[1];
    const int P = (cols - 1) / K;
    const int M = K / N;
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < M; ++j) {
        const int n = i * M + j;
        std::vector<int> idx{0};
        for (int p = 0; p < P; ++p)
          for (int v = 0; v < M; ++v) idx.push_back(1 + p * K + i * M + v);
        for (int c : idx) {
          const Eigen::VectorXd chain = At.col(n * cols + c);
          try {
            out.inefficiency.push_back(inefficiency_factor(chain));
          } catch (const Error&) {
            out.inefficiency.push_back(std::numeric_limits<double>::infinity());
          }
        }
      }
    }
  }
  return out;
}

namespace {

ExperimentRow fit_one(Estimator e, const PanelData& panel, const DgpTruth& truth, const DgpSpec& spec,
                      const ExperimentPlan& plan, std::uint64_t stream) {
  ExperimentRow row;
  row.estimator = estimator_name(e);
  row.T = spec.T;
  row.sparsity = spec.sparsity;
  try {
    ModelConfig cfg = plan.model;
    cfg.P = spec.P;
    RunOptions opts;
    opts.label = row.estimator;
    opts.stream = stream;
    switch (e) {
      case Estimator::var_ols:
        row.rmse = coefficient_rmse(fit_var_ols(panel, spec.P), truth.A);
        break;
      case Estimator::var_ng:
        row.rmse = coefficient_rmse(fit_var_ng(panel, cfg, opts), truth.A);
        break;
      case Estimator::pvar_mix:
      case Estimator::pvar_g1: {
        cfg.prior = PriorKind::mixture;
        if (e == Estimator::pvar_g1) cfg.G = 1;
        const DrawStore store = run_chain(panel, cfg, opts).store;
        row.rmse = coefficient_rmse(store, truth.A);
        const auto diag = mixture_diagnostics(store, truth.delta, truth.mu, truth.w, cfg.ident, cfg.ident_coord);
        row.qps = diag.qps;
        row.gstar_mode = diag.gstar_mode;
        row.share_allocated =
            static_cast<double>(std::count_if(diag.alloc_prob.begin(), diag.alloc_prob.end(),
                                              [](double p) { return p > 0.9; })) /
            static_cast<double>(diag.alloc_prob.size());
        row.log_lambda_median = diag.log_lambda_median;
        if (!diag.inefficiency.empty()) {
          row.share_ineff_below_30 =
              static_cast<double>(std::count_if(diag.inefficiency.begin(), diag.inefficiency.end(),
                                                [](double v) { return v < 30.0; })) /
              static_cast<double>(diag.inefficiency.size());
        }
        break;
      }
    }
  } catch (const std::exception& ex) {
    row.rmse = std::numeric_limits<double>::quiet_NaN();
    row.error = ex.what();
  }
  return row;
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const DgpSpec& spec, const ExperimentPlan& plan) {
  require(plan.replications >= 1 && plan.threads >= 1, ErrorKind::invalid_parameter,
          "need >= 1 replication and thread");
  struct Job {
    int T;
    double sparsity;
    int rep;
    std::size_t cell;
  };
  std::vector<Job> jobs;
  std::size_t cell = 0;
  for (int T : plan.T_grid) {
    for (double sp : plan.sparsity_grid) {
      for (int r = 0; r < plan.replications; ++r) jobs.push_back({T, sp, r, cell});
      ++cell;
    }
  }
  const std::size_t E = plan.estimators.size();
  std::vector<ExperimentRow> rows(jobs.size() * E);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const Job& jb = jobs[k];
      DgpSpec s = spec;
      s.T = jb.T;
      s.sparsity = jb.sparsity;
      const std::uint64_t stream = jb.cell * 100003ULL + static_cast<std::uint64_t>(jb.rep);
      RngStream rng(spec.seed, hash_label("dgp") ^ stream);
      try {
        const auto [panel, truth] = generate_dgp(s, rng);
        for (std::size_t e = 0; e < E; ++e) {
          rows[k * E + e] = fit_one(plan.estimators[e], panel, truth, s, plan, stream);
          rows[k * E + e].replication = jb.rep;
        }
      } catch (const std::exception& ex) {
        for (std::size_t e = 0; e < E; ++e) {
          ExperimentRow& r = rows[k * E + e];
          r.estimator = estimator_name(plan.estimators[e]);
          r.T = jb.T;
          r.sparsity = jb.sparsity;
          r.replication = jb.rep;
          r.rmse = std::numeric_limits<double>::quiet_NaN();
          r.error = ex.what();
        }
      }
    }
  };
  const int nt = std::min<int>(plan.threads, static_cast<int>(jobs.size()));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

std::vector<ExperimentRow> summarize_experiment(const std::vector<ExperimentRow>& rows) {
  std::map<std::tuple<std::string, int, double>, std::vector<const ExperimentRow*>> cells;
  std::vector<std::tuple<std::string, int, double>> order;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.estimator, r.T, r.sparsity);
    if (!cells.count(key)) order.push_back(key);
    cells[key].push_back(&r);
  }
  std::vector<ExperimentRow> out;
  for (const auto& key : order) {
    std::vector<double> rm;
    std::vector<double> qp;
    int failed = 0;
    for (const auto* r : cells[key]) {
      if (!r->error.empty()) {
        ++failed;
        continue;
      }
      rm.push_back(r->rmse);
      if (r->qps >= 0) qp.push_back(r->qps);
    }
    ExperimentRow s;
    s.estimator = std::get<0>(key);
    s.T = std::get<1>(key);
    s.sparsity = std::get<2>(key);
    s.replication = -1;
    s.rmse = median_of(rm);
    s.qps = qp.empty() ? -1.0 : median_of(qp);
    if (failed > 0) s.error = std::to_string(failed) + " failed replications";
    out.push_back(s);
  }
  return out;
}

void write_experiment_csv(const std::string& path, const std::vector<ExperimentRow>& rows) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io_error, "cannot write " + path);
  out.precision(10);
  out << "estimator,T,sparsity,replication,rmse,qps,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << r.estimator << ',' << r.T << ',' << r.sparsity << ',' << r.replication << ',' << r.rmse << ',';
    if (r.qps >= 0) out << r.qps;
    out << ',' << err << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::io_error, "short write on " + path);
}

}  // namespace pvarmix
