#include "pvarmix/error.hpp"
#include "pvarmix/forecast.hpp"
#include "pvarmix/simlab.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace pvarmix;

namespace {

// A store holding `copies` identical draws of one parameter set.
DrawStore single_draw_store(const Eigen::MatrixXd& A, const Eigen::MatrixXd& L, const std::vector<SVParams>& svf,
                            const std::vector<SVParams>& svi, const Eigen::VectorXd& hf, const Eigen::VectorXd& ho,
                            int copies = 1) {
  const int K = static_cast<int>(A.rows());
  const int q = static_cast<int>(L.cols());
  DrawStore s;
  s.add_block("coefficients", {K, static_cast<int>(A.cols())});
  s.add_block("loadings", {K, q});
  s.add_block("sv_factor", {q, 3});
  s.add_block("sv_idio", {K, 3});
  s.add_block("logvar_factor_last", {q});
  s.add_block("logvar_idio_last", {K});
  auto pack = [](const std::vector<SVParams>& v) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 3);
    for (std::size_t k = 0; k < v.size(); ++k)
      m.row(static_cast<Eigen::Index>(k)) << v[k].phi, v[k].rho, v[k].sigma;
    return m;
  };
  for (int c = 0; c < copies; ++c) {
    s.append("coefficients", A);
    s.append("loadings", L);
    s.append("sv_factor", pack(svf));
    s.append("sv_idio", pack(svi));
    s.append("logvar_factor_last", hf);
    s.append("logvar_idio_last", ho);
  }
  return s;
}

}  // namespace

TEST_CASE("predictive of a pure noise model") {
  RngStream rng(1, 0);
  const PanelData p = testing::random_panel(2, 1, 10, rng);
  const DrawStore s = single_draw_store(Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(2, 0), {},
                                        {{-0.5, 0.9, 0.0}, {0.7, 0.9, 0.0}}, Eigen::VectorXd(0),
                                        Eigen::Vector2d(-0.5, 0.7), 200);
  const PredictiveSummary ps = predict(s, p, 2, rng, {0, 1}, 1000);
  CHECK(ps.draws == 200000);
  CHECK(std::abs(ps.mean[0]) < 4 * std::sqrt(std::exp(-0.5) / ps.draws));
  CHECK(ps.var[0] == doctest::Approx(std::exp(-0.5)).epsilon(0.01));
  CHECK(ps.var[1] == doctest::Approx(std::exp(0.7)).epsilon(0.01));
  CHECK(std::abs(ps.joint_cov(0, 1)) < 0.01);
}

TEST_CASE("zero process noise reproduces the deterministic iterate") {
  RngStream rng(2, 0);
  const PanelData p = testing::random_panel(2, 1, 10, rng);
  Eigen::MatrixXd A(2, 3);
  A << 0.1, 0.5, -0.2, 0.3, 0.1, 0.8;
  const DrawStore s = single_draw_store(A, Eigen::MatrixXd::Zero(2, 0), {}, {{-600, 0.5, 0.0}, {-600, 0.5, 0.0}},
                                        Eigen::VectorXd(0), Eigen::Vector2d(-600, -600), 3);
  for (int h : {1, 3}) {
    const PredictiveSummary ps = predict(s, p, h, rng);
    const Eigen::VectorXd det = predict_deterministic(A, p, 1, h);
    CHECK((ps.mean - det).cwiseAbs().maxCoeff() < 1e-12);
  }
  const Eigen::VectorXd one = predict_deterministic(A, p, 1, 1);
  CHECK(one[0] == doctest::Approx(0.1 + 0.5 * p.Y(9, 0) - 0.2 * p.Y(9, 1)));
}

TEST_CASE("predictive moments match a brute-force simulation") {
  RngStream rng(3, 0);
  const PanelData p = testing::random_panel(2, 1, 6, rng);
  Eigen::MatrixXd A(2, 3);
  A << 0.2, 0.6, 0.1, -0.1, 0.2, 0.5;
  Eigen::MatrixXd L(2, 1);
  L << 1.0, 0.5;
  const SVParams sf{0.0, 0.9, 0.3};
  const std::vector<SVParams> si{{-1.0, 0.8, 0.2}, {-0.5, 0.7, 0.4}};
  const Eigen::VectorXd hf = Eigen::VectorXd::Constant(1, 0.4);
  const Eigen::Vector2d ho(-1.3, 0.1);
  const DrawStore s = single_draw_store(A, L, {sf}, si, hf, ho, 100);
  const int h = 3;
  const PredictiveSummary ps = predict(s, p, h, rng, {}, 4000);

  // independent oracle
  RngStream orng(3, 1);
  const int n = 1000000;
  Eigen::Vector2d m = Eigen::Vector2d::Zero();
  Eigen::Vector2d m2 = Eigen::Vector2d::Zero();
  Eigen::Vector2d m4 = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> ys(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Eigen::Vector2d y = p.Y.row(5).transpose();
    double a = hf[0];
    Eigen::Vector2d w = ho;
    for (int s2 = 0; s2 < h; ++s2) {
      a = sf.phi + sf.rho * (a - sf.phi) + sf.sigma * orng.normal();
      const double f = std::exp(0.5 * a) * orng.normal();
      Eigen::Vector2d next = A.col(0) + A.rightCols(2) * y + L.col(0) * f;
      for (int j = 0; j < 2; ++j) {
        w[j] = si[static_cast<std::size_t>(j)].phi + si[static_cast<std::size_t>(j)].rho * (w[j] - si[static_cast<std::size_t>(j)].phi) +
               si[static_cast<std::size_t>(j)].sigma * orng.normal();
        next[j] += std::exp(0.5 * w[j]) * orng.normal();
      }
      y = next;
    }
    ys[static_cast<std::size_t>(k)] = y;
    m += y;
  }
  m /= n;
  for (const auto& y : ys) {
    const Eigen::Array2d d = (y - m).array();
    m2 += (d * d).matrix();
    m4 += (d * d * d * d).matrix();
  }
  m2 /= n;
  m4 /= n;
  const double N1 = ps.draws;
  for (int j = 0; j < 2; ++j) {
    CAPTURE(j);
    const double se_mean = std::sqrt(m2[j] / N1 + m2[j] / n);
    const double se_var = std::sqrt((m4[j] - m2[j] * m2[j]) * (1 / N1 + 1.0 / n));
    CHECK(std::abs(ps.mean[j] - m[j]) < 4 * se_mean);
    CHECK(std::abs(ps.var[j] - m2[j]) < 4 * se_var);
  }
}

TEST_CASE("explosive draws are dropped and counted") {
  RngStream rng(4, 0);
  PanelData p = testing::random_panel(1, 1, 4, rng);
  p.Y.setConstant(1.0);
  Eigen::MatrixXd A(1, 2);
  A << 0.0, 1e7;
  const DrawStore s = single_draw_store(A, Eigen::MatrixXd::Zero(1, 0), {}, {{0, 0.5, 0.1}}, Eigen::VectorXd(0),
                                        Eigen::VectorXd::Zero(1), 5);
  CHECK_THROWS_AS(predict(s, p, 3, rng), Error);
  CHECK_THROWS_AS(predict(s, p, 0, rng), Error);
}

TEST_CASE("Gaussian log predictive scores") {
  const double c = -0.5 * std::log(2 * std::numbers::pi);
  CHECK(lps_gaussian(0, 1, 0) == doctest::Approx(c).epsilon(1e-15));
  CHECK(lps_gaussian(0, 1, 2) == doctest::Approx(c - 2).epsilon(1e-15));
  CHECK(lps_gaussian(0, 1, 0) == doctest::Approx(-0.9189385332046727).epsilon(1e-15));
  CHECK_THROWS_AS(lps_gaussian(0, 0, 1), Error);
  CHECK(joint_lps(Eigen::VectorXd::Constant(1, 0.3), Eigen::MatrixXd::Constant(1, 1, 2.0),
                  Eigen::VectorXd::Constant(1, -1.0)) == lps_gaussian(0.3, 2.0, -1.0));

  Eigen::Vector3d mu(0.1, -0.2, 0.5), v(0.5, 2.0, 1.5), x(0.0, 1.0, -1.0);
  double sum = 0;
  for (int k = 0; k < 3; ++k) sum += lps_gaussian(mu[k], v[k], x[k]);
  CHECK(joint_lps(mu, v.asDiagonal().toDenseMatrix(), x) == doctest::Approx(sum).epsilon(1e-13));
  CHECK(joint_lps(Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Zero(4)) ==
        doctest::Approx(-2 * std::log(2 * std::numbers::pi)).epsilon(1e-14));

  Eigen::Matrix3d S;
  S << 2.0, 0.5, 0.3, 0.5, 1.0, -0.2, 0.3, -0.2, 1.5;
  const Eigen::Vector3d e = x - mu;
  const double dense = -1.5 * std::log(2 * std::numbers::pi) - 0.5 * std::log(S.determinant()) - 0.5 * e.dot(S.inverse() * e);
  CHECK(joint_lps(mu, S, x) == doctest::Approx(dense).epsilon(1e-13));
  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(joint_lps(Eigen::Vector2d::Zero(), bad, Eigen::Vector2d::Zero()), Error);
}

TEST_CASE("recursive evaluation bookkeeping and self-comparison") {
  DgpSpec spec = DgpSpec::desk();
  spec.N = 3;
  spec.T = 40;
  RngStream rng(5, 0);
  const auto [panel, truth] = generate_dgp(spec, rng);
  ModelConfig cfg;
  cfg.draws = 150;
  cfg.burnin = 50;
  EvaluationPlan plan;
  plan.train_end = spec.T - 2;
  plan.horizons = {1};
  plan.models = {ModelKind::ar1_sv, ModelKind::var_ng};
  const EvaluationResult r = recursive_evaluation(panel, cfg, plan);

  int bench_rows = 0;
  for (const ScoreRow& row : r.scores) {
    if (row.model != "ar1_sv") continue;
    ++bench_rows;
    CHECK(std::abs(row.rmse_rel - 1.0) <= 1e-12);
    CHECK(std::abs(row.lps_diff) <= 1e-12);
  }
  // two origins, one horizon, three countries plus the joint row
  CHECK(bench_rows == 2 * (spec.N + 1));
  int ng_records = 0;
  for (const ForecastRecord& rec : r.records) ng_records += rec.model == "var_ng";
  CHECK(ng_records == 2);
  for (const ScoreRow& row : r.aggregate)
    if (row.model == "ar1_sv") CHECK(std::abs(row.rmse_rel - 1.0) <= 1e-12);

  const EvaluationResult again = recursive_evaluation(panel, cfg, plan);
  REQUIRE(again.scores.size() == r.scores.size());
  for (std::size_t k = 0; k < r.scores.size(); ++k) {
    CHECK(again.scores[k].lps_model == r.scores[k].lps_model);
    CHECK(again.scores[k].rmse_rel == r.scores[k].rmse_rel);
  }

  const auto path = std::filesystem::temp_directory_path() / "pvarmix_scores.csv";
  write_scores_csv(path.string(), r.scores, false);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("model,country,horizon,origin,rmse_rel,lps_diff", 0) == 0);
  std::filesystem::remove(path);

  EvaluationPlan late = plan;
  late.train_end = spec.T + 1;
  CHECK_THROWS_AS(recursive_evaluation(panel, cfg, late), Error);
  CHECK(parse_model(model_name(ModelKind::pvar_g1)) == ModelKind::pvar_g1);
  CHECK_THROWS_AS(parse_model("x"), Error);
}
