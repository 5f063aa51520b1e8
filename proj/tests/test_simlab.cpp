#include "pvarmix/error.hpp"
#include "pvarmix/simlab.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace pvarmix;

TEST_CASE("sparsify thresholds against the global maximum") {
  RngStream rng(1, 0);
  Eigen::MatrixXd B(4, 6);
  for (Eigen::Index k = 0; k < B.size(); ++k) B.data()[k] = rng.normal();
  CHECK(sparsify(B, 0.0) == B);
  const Eigen::MatrixXd one = sparsify(B, 1.0);
  CHECK((one.array() != 0.0).count() == 1);
  CHECK(one.cwiseAbs().maxCoeff() == B.cwiseAbs().maxCoeff());

  const Eigen::MatrixXd half = sparsify(B, 0.5);
  const double mx = B.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < B.size(); ++k) {
    const bool keep = std::abs(B.data()[k]) >= 0.5 * mx;
    REQUIRE(half.data()[k] == (keep ? B.data()[k] : 0.0));
  }
  CHECK(sparsify(half, 0.5) == half);
  CHECK_THROWS_AS(sparsify(B, 1.5), Error);

  std::vector<Eigen::MatrixXd> blocks{B, 0.1 * B};
  sparsify_blocks(blocks, 0.3);
  // the scaled block falls entirely below the shared threshold
  CHECK(blocks[1].isZero());
  CHECK(blocks[0] == sparsify(B, 0.3));
}

TEST_CASE("generated panel: full sparsity and replay") {
  DgpSpec spec = DgpSpec::desk();
  spec.N = 4;
  spec.sparsity = 1.0;
  RngStream a(2, 0), b(2, 0);
  const auto [pa, ta] = generate_dgp(spec, a);
  const auto [pb, tb] = generate_dgp(spec, b);
  CHECK(pa.Y == pb.Y);
  CHECK(ta.A == tb.A);
  CHECK(ta.delta == tb.delta);
  CHECK(pa.T() == spec.T);
  CHECK(pa.K() == spec.N * spec.M);
  // strict inequality: only the largest foreign coefficient survives
  Eigen::Index nonzero = 0;
  for (const auto& B : ta.state.B) nonzero += (B.array() != 0.0).count();
  CHECK(nonzero == 1);
  CHECK(companion_radius(ta.A, spec.P) < 0.99);
}

TEST_CASE("generated panel: homoskedastic independent errors without factors") {
  DgpSpec spec = DgpSpec::desk();
  spec.N = 3;
  spec.T = 4000;
  spec.q = 0;
  spec.sv_omega = SVParams{-1.0, 0.9, 0.0};
  RngStream rng(3, 0);
  const auto [panel, truth] = generate_dgp(spec, rng);
  Eigen::MatrixXd E(panel.T() - 1, panel.K());
  for (int t = 1; t < panel.T(); ++t)
    E.row(t - 1) = (panel.Y.row(t).transpose() - truth.A * lag_vector(panel.Y, t, 1)).transpose();
  const Eigen::MatrixXd S = E.transpose() * E / E.rows();
  for (int n = 0; n < panel.K(); ++n) {
    CHECK(S(n, n) == doctest::Approx(std::exp(-1.0)).epsilon(0.06));
    for (int c = 0; c < n; ++c) CHECK(std::abs(S(n, c)) < 0.03);
  }
}

TEST_CASE("generated panel with zero shocks follows the deterministic recursion") {
  DgpSpec spec = DgpSpec::desk();
  spec.N = 4;
  spec.zero_shocks = true;
  RngStream rng(4, 0);
  const auto [panel, truth] = generate_dgp(spec, rng);
  for (int t = 1; t < panel.T(); ++t) {
    const Eigen::VectorXd y = truth.A * lag_vector(panel.Y, t, 1);
    REQUIRE((y - panel.Y.row(t).transpose()).cwiseAbs().maxCoeff() < 1e-10);
  }
  // started at the unconditional mean, the path stays there
  CHECK((panel.Y.row(0) - panel.Y.row(panel.T() - 1)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("truth record and mixture centers") {
  DgpSpec spec = DgpSpec::desk();
  RngStream rng(5, 0);
  const auto [panel, truth] = generate_dgp(spec, rng);
  CHECK(truth.mu.cols() == 2);
  CHECK(truth.mu.rows() == spec.M * (spec.M * spec.P + 1));
  CHECK(static_cast<int>(truth.delta.size()) == spec.N);
  // a perfect allocation has zero QPS
  DrawStore store;
  store.add_block("mixture_w", {2});
  store.add_block("mixture_delta", {spec.N});
  store.add_block("mixture_mu", {static_cast<int>(truth.mu.rows()), 2});
  store.add_block("mixture_lambda", {static_cast<int>(truth.mu.rows())});
  for (int d = 0; d < 5; ++d) {
    store.append("mixture_w", truth.w);
    Eigen::VectorXd del(spec.N);
    for (int i = 0; i < spec.N; ++i) del[i] = truth.delta[static_cast<std::size_t>(i)];
    store.append("mixture_delta", del);
    store.append("mixture_mu", truth.mu);
    store.append("mixture_lambda", Eigen::VectorXd::Ones(truth.mu.rows()));
  }
  const MixtureDiagnostics md = mixture_diagnostics(store, truth.delta, truth.mu, truth.w, IdentScheme::coordinate, 0);
  CHECK(md.qps == 0.0);
  for (double p : md.alloc_prob) CHECK(p == doctest::Approx(1.0));
  const int gs = static_cast<int>(std::set<int>(truth.delta.begin(), truth.delta.end()).size());
  CHECK(md.gstar_mode == gs);
  CHECK_NOTHROW(DgpSpec{}.validate());
  DgpSpec bad = spec;
  bad.w_true = Eigen::Vector2d(0.5, 0.6);
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("least squares: noiseless recovery, normal equations and intercepts") {
  RngStream rng(6, 0);
  // noiseless data started away from the steady state
  Eigen::MatrixXd A(2, 3);
  A << 0.1, 0.5, 0.2, -0.3, 0.1, 0.7;
  PanelData p = testing::random_panel(1, 2, 20, rng);
  p.Y.row(0) << 5.0, -3.0;
  for (int t = 1; t < p.T(); ++t) p.Y.row(t) = (A * lag_vector(p.Y, t, 1)).transpose();
  CHECK((fit_var_ols(p, 1) - A).cwiseAbs().maxCoeff() < 1e-8);

  const PanelData r = testing::random_panel(2, 2, 40, rng);
  Eigen::MatrixXd X(39, 5);
  for (int t = 1; t < 40; ++t) X.row(t - 1) = lag_vector(r.Y, t, 1).transpose();
  const Eigen::MatrixXd oracle = ((X.transpose() * X).inverse() * X.transpose() * r.Y.bottomRows(39)).transpose();
  CHECK((fit_var_ols(r, 1) - oracle).cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::MatrixXd mean = fit_var_ols(r, 0);
  CHECK((mean.col(0) - r.Y.colwise().mean().transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(fit_var_ols(r.head(5), 1), Error);
}

TEST_CASE("coefficient rmse") {
  Eigen::MatrixXd A(2, 3);
  A << 1, 2, 3, 4, 5, 6;
  CHECK(coefficient_rmse(A, A) == 0.0);
  CHECK(coefficient_rmse(Eigen::MatrixXd(A.array() + 0.25), A) == doctest::Approx(0.25));
  CHECK_THROWS_AS(coefficient_rmse(A, Eigen::MatrixXd::Zero(3, 2)), Error);
  DrawStore s;
  s.add_block("coefficients", {2, 3});
  s.append("coefficients", A);
  s.append("coefficients", Eigen::MatrixXd(A.array() + 1.0));
  s.append("coefficients", Eigen::MatrixXd(A.array() - 1.0));
  CHECK(coefficient_rmse(s, A) == 0.0);
}

TEST_CASE("AR(1)-SV benchmark") {
  RngStream rng(7, 0);
  PanelData p = testing::random_panel(1, 2, 400, rng);
  for (int t = 1; t < p.T(); ++t) p.Y(t, 1) = 0.8 * p.Y(t - 1, 1) + 0.5 * rng.normal();
  ModelConfig cfg;
  cfg.q = 0;
  cfg.draws = 3000;
  cfg.burnin = 1000;
  const DrawStore s = fit_ar1_sv(p, cfg);
  const DrawStore::Table tab = s.table("coefficients");
  // white noise series 0: own lag in column 1; AR series 1: column 3
  auto stats = [&](int col) {
    const Eigen::VectorXd x = tab.col(col);
    const double m = x.mean();
    return std::pair{m, std::sqrt((x.array() - m).square().mean())};
  };
  const auto [m0, s0] = stats(1);
  const auto [m1, s1] = stats(1 * 3 + 2);
  CHECK(std::abs(m0) < 3 * s0);
  CHECK(std::abs(m1 - 0.8) < 3 * s1);
  CHECK(s0 < 0.1);
  CHECK(tab.col(2).isZero());

  PanelData flat = p;
  flat.Y.col(0).setConstant(2.0);
  CHECK_THROWS_AS(fit_ar1_sv(flat, cfg), Error);
}

TEST_CASE("large-VAR NG fit produces a full coefficient store") {
  DgpSpec spec = DgpSpec::desk();
  spec.N = 3;
  RngStream rng(8, 0);
  const auto [panel, truth] = generate_dgp(spec, rng);
  ModelConfig cfg;
  cfg.draws = 300;
  cfg.burnin = 100;
  const DrawStore s = fit_var_ng(panel, cfg);
  CHECK(s.retained() == 200);
  CHECK(s.block("coefficients").shape == std::vector<int>{6, 7});
  CHECK(s.block("shrink_tau2").shape == std::vector<int>{6, 6});
  CHECK(!s.has("mixture_w"));
  CHECK(std::isfinite(coefficient_rmse(s, truth.A)));
}

TEST_CASE("experiment harness: single cell, determinism, CSV") {
  DgpSpec spec = DgpSpec::desk();
  spec.N = 3;
  spec.replications = 2;
  ExperimentPlan plan;
  plan.estimators = {Estimator::var_ols};
  plan.replications = 2;
  plan.model.draws = 50;
  plan.model.burnin = 10;
  const auto rows = run_experiment(spec, plan);
  const auto again = run_experiment(spec, plan);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].estimator == "var_ols");
  CHECK(rows[0].error.empty());
  for (std::size_t k = 0; k < rows.size(); ++k) CHECK(rows[k].rmse == again[k].rmse);
  const auto sum = summarize_experiment(rows);
  REQUIRE(sum.size() == 1);
  CHECK(sum[0].rmse == doctest::Approx(0.5 * (rows[0].rmse + rows[1].rmse)));

  const auto path = std::filesystem::temp_directory_path() / "pvarmix_experiment.csv";
  write_experiment_csv(path.string(), rows);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "estimator,T,sparsity,replication,rmse,qps,error");
  std::filesystem::remove(path);

  // a failing replication is recorded, not dropped
  ExperimentPlan short_plan = plan;
  short_plan.T_grid = {4};
  const auto failed = run_experiment(spec, short_plan);
  REQUIRE(failed.size() == 2);
  CHECK(!failed[0].error.empty());
  CHECK(estimator_name(parse_estimator("pvar_mix")) == std::string("pvar_mix"));
  CHECK_THROWS_AS(parse_estimator("nope"), Error);
}
