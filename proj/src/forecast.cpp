#include "pvarmix/forecast.hpp"

#include "pvarmix/error.hpp"
#include "pvarmix/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <thread>

namespace pvarmix {

namespace {

constexpr double kCap = 1e12;

Eigen::VectorXd lags_at_end(const Eigen::MatrixXd& hist, int P) {
  const Eigen::Index K = hist.cols();
  Eigen::VectorXd x(1 + K * P);
  x[0] = 1.0;
  for (int p = 0; p < P; ++p) x.segment(1 + p * K, K) = hist.row(hist.rows() - 1 - p).transpose();
  return x;
}

}  // namespace

PredictiveSummary predict(const DrawStore& store, const PanelData& panel, int h, RngStream& rng,
                          const std::vector<int>& joint_index, int paths_per_draw) {
  require(h >= 1 && paths_per_draw >= 1, ErrorKind::invalid_parameter, "horizon and path count must be >= 1");
  panel.validate();
  const int D = store.retained();
  require(D > 0, ErrorKind::insufficient_draws, "store holds no draws");
  const int K = panel.K();
  const auto& cb = store.block("coefficients");
  require(cb.shape.size() == 2 && cb.shape[0] == K && (cb.shape[1] - 1) % K == 0, ErrorKind::dimension_mismatch,
          "store does not match the panel");
  const int P = (cb.shape[1] - 1) / K;
  require(panel.T() >= P, ErrorKind::dimension_mismatch, "panel shorter than the lag order");
  for (int c : joint_index) require(c >= 0 && c < K, ErrorKind::invalid_parameter, "joint index out of range");

  const auto At = store.table("coefficients");
  const auto Lt = store.table("loadings");
  const auto SFt = store.table("sv_factor");
  const auto SIt = store.table("sv_idio");
  const auto HFt = store.table("logvar_factor_last");
  const auto HIt = store.table("logvar_idio_last");
  const int q = store.block("loadings").shape[1];

  PredictiveSummary out;
  out.h = h;
  out.joint_index = joint_index;
  Eigen::MatrixXd sims(static_cast<Eigen::Index>(D) * paths_per_draw, K);
  int n = 0;
  Eigen::MatrixXd hist(P, K);
  Eigen::VectorXd hf(q);
  Eigen::VectorXd ho(K);
  Eigen::VectorXd f(q);
  for (int d = 0; d < D; ++d) {
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(
        At.row(d).data(), K, 1 + K * P);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> L(
        Lt.row(d).data(), K, q);
    for (int path = 0; path < paths_per_draw; ++path) {
      // hist row 0 is the oldest lag
      hist = panel.Y.bottomRows(P);
      for (int k = 0; k < q; ++k) hf[k] = HFt(d, k);
      for (int k = 0; k < K; ++k) ho[k] = HIt(d, k);
      Eigen::VectorXd y(K);
      bool bad = false;
      for (int s = 0; s < h && !bad; ++s) {
        for (int k = 0; k < q; ++k) {
          const double phi = SFt(d, 3 * k);
          hf[k] = phi + SFt(d, 3 * k + 1) * (hf[k] - phi) + SFt(d, 3 * k + 2) * rng.normal();
          f[k] = std::exp(0.5 * hf[k]) * rng.normal();
        }
        y = A * lags_at_end(hist, P);
        if (q > 0) y += L * f;
        for (int k = 0; k < K; ++k) {
          const double phi = SIt(d, 3 * k);
          ho[k] = phi + SIt(d, 3 * k + 1) * (ho[k] - phi) + SIt(d, 3 * k + 2) * rng.normal();
          y[k] += std::exp(0.5 * ho[k]) * rng.normal();
        }
        if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kCap) {
          bad = true;
          break;
        }
        if (P > 1) hist.topRows(P - 1) = hist.bottomRows(P - 1).eval();
        hist.row(P - 1) = y.transpose();
      }
      if (bad) {
        ++out.overflow;
        continue;
      }
      sims.row(n++) = y.transpose();
    }
  }
  require(n >= 2, ErrorKind::insufficient_draws, "fewer than two finite predictive paths");
  const auto S = sims.topRows(n);
  out.draws = n;
  out.mean = S.colwise().mean().transpose();
  const Eigen::MatrixXd Cn = S.rowwise() - out.mean.transpose();
  out.var = Cn.colwise().squaredNorm().transpose() / (n - 1);
  if (!joint_index.empty()) {
    const Eigen::Index J = static_cast<Eigen::Index>(joint_index.size());
    Eigen::MatrixXd sub(n, J);
    out.joint_mean.resize(J);
    for (Eigen::Index k = 0; k < J; ++k) {
      sub.col(k) = Cn.col(joint_index[static_cast<std::size_t>(k)]);
      out.joint_mean[k] = out.mean[joint_index[static_cast<std::size_t>(k)]];
    }
    out.joint_cov = sub.transpose() * sub / (n - 1);
  }
  return out;
}

Eigen::VectorXd predict_deterministic(const Eigen::MatrixXd& A, const PanelData& panel, int P, int h) {
  const int K = panel.K();
  require(A.rows() == K && A.cols() == 1 + K * P, ErrorKind::dimension_mismatch, "coefficient shape");
  require(h >= 1 && panel.T() >= P, ErrorKind::invalid_parameter, "horizon and lag order");
  Eigen::MatrixXd hist = panel.Y.bottomRows(P);
  Eigen::VectorXd y;
  for (int s = 0; s < h; ++s) {
    y = A * lags_at_end(hist, P);
    if (P > 1) hist.topRows(P - 1) = hist.bottomRows(P - 1).eval();
    hist.row(P - 1) = y.transpose();
  }
  return y;
}

double lps_gaussian(double mean, double var, double realized) {
  require(var > 0 && std::isfinite(var), ErrorKind::invalid_parameter, "predictive variance must be > 0");
  const double z = realized - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + z * z / var);
}

double joint_lps(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const Eigen::VectorXd& realized) {
  const Eigen::Index n = mean.size();
  require(cov.rows() == n && cov.cols() == n && realized.size() == n, ErrorKind::dimension_mismatch,
          "joint score dimensions");
  if (n == 1) return lps_gaussian(mean[0], cov(0, 0), realized[0]);
  const Eigen::MatrixXd S = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  require(llt.info() == Eigen::Success, ErrorKind::invalid_parameter, "predictive covariance is not positive definite");
  const Eigen::VectorXd z = llt.matrixL().solve(realized - mean);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + logdet + z.squaredNorm());
}

const char* model_name(ModelKind m) {
  switch (m) {
    case ModelKind::pvar_mix: return "pvar_mix";
    case ModelKind::pvar_g1: return "pvar_g1";
    case ModelKind::var_ng: return "var_ng";
    case ModelKind::ar1_sv: return "ar1_sv";
  }
  return "?";
}

ModelKind parse_model(const std::string& s) {
  for (ModelKind m : {ModelKind::pvar_mix, ModelKind::pvar_g1, ModelKind::var_ng, ModelKind::ar1_sv})
    if (s == model_name(m)) return m;
  fail(ErrorKind::config_error, "unknown model '" + s + "'");
}

FitResult fit_model(ModelKind kind, const PanelData& panel, const ModelConfig& cfg, const RunOptions& opts) {
  ModelConfig c = cfg;
  switch (kind) {
    case ModelKind::ar1_sv:
      return FitResult{fit_ar1_sv(panel, cfg, opts), std::nullopt};
    case ModelKind::pvar_mix:
      c.prior = PriorKind::mixture;
      break;
    case ModelKind::pvar_g1:
      c.prior = PriorKind::mixture;
      c.G = 1;
      break;
    case ModelKind::var_ng:
      c.prior = PriorKind::lagwise_ng;
      break;
  }
  ChainResult r = run_chain(panel, c, opts);
  return FitResult{std::move(r.store), std::move(r.final_state)};
}

namespace {

std::vector<ForecastRecord> evaluate_model(ModelKind kind, const PanelData& panel, const ModelConfig& cfg,
                                           const EvaluationPlan& plan) {
  const int T = panel.T();
  const int N = panel.N();
  const int M = panel.M();
  std::vector<int> target(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) target[static_cast<std::size_t>(i)] = i * M + plan.target_variable;
  std::vector<ForecastRecord> out;
  std::optional<ParameterState> warm;
  const std::string name = model_name(kind);
  for (int o = plan.train_end; o < T; ++o) {
    try {
      const PanelData train = panel.head(o);
      RunOptions opts;
      opts.label = name;
      opts.stream = static_cast<std::uint64_t>(o);
      if (plan.warm_start && warm) opts.init = &*warm;
      FitResult fit = fit_model(kind, train, cfg, opts);
      if (plan.warm_start) warm = std::move(fit.final_state);
      for (int h : plan.horizons) {
        if (o - 1 + h > T - 1) continue;
        RngStream rng(cfg.seed, hash_label("predict:" + name) ^ (static_cast<std::uint64_t>(o) << 8 | h));
        const PredictiveSummary ps = predict(fit.store, train, h, rng, target, plan.paths_per_draw);
        ForecastRecord rec;
        rec.model = name;
        rec.origin = o;
        rec.horizon = h;
        rec.mean = ps.joint_mean;
        rec.var.resize(N);
        rec.realized.resize(N);
        rec.lps.resize(N);
        for (int i = 0; i < N; ++i) {
          const int c = target[static_cast<std::size_t>(i)];
          rec.var[i] = ps.var[c];
          rec.realized[i] = panel.Y(o - 1 + h, c);
          rec.lps[i] = lps_gaussian(rec.mean[i], rec.var[i], rec.realized[i]);
        }
        rec.joint = joint_lps(rec.mean, ps.joint_cov, rec.realized);
        out.push_back(std::move(rec));
      }
    } catch (const Error& e) {
      throw Error(e.kind(), name + " at origin " + std::to_string(o) + ": " + e.what());
    }
  }
  return out;
}

double ratio(double num, double den) {
  if (num == den) return 1.0;
  return num / den;
}

}  // namespace

EvaluationResult recursive_evaluation(const PanelData& panel, const ModelConfig& cfg, const EvaluationPlan& plan) {
  panel.validate();
  require(!plan.horizons.empty(), ErrorKind::invalid_parameter, "no horizons");
  const int hmax = *std::max_element(plan.horizons.begin(), plan.horizons.end());
  require(*std::min_element(plan.horizons.begin(), plan.horizons.end()) >= 1, ErrorKind::invalid_parameter,
          "horizons must be >= 1");
  require(plan.train_end > cfg.P && plan.train_end + hmax <= panel.T(), ErrorKind::invalid_parameter,
          "training end + max horizon must not exceed T");
  require(plan.target_variable >= 0 && plan.target_variable < panel.M(), ErrorKind::invalid_parameter,
          "target variable out of range");

  std::vector<ModelKind> kinds{plan.benchmark};
  for (ModelKind m : plan.models)
    if (std::find(kinds.begin(), kinds.end(), m) == kinds.end()) kinds.push_back(m);
  std::vector<std::vector<ForecastRecord>> recs(kinds.size());
  std::vector<std::string> errors(kinds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < kinds.size(); k = next++) {
      try {
        recs[k] = evaluate_model(kinds[k], panel, cfg, plan);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const int nt = std::min<int>(std::max(plan.threads, 1), static_cast<int>(kinds.size()));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) fail(ErrorKind::numeric_failure, e);

  EvaluationResult res;
  std::map<std::pair<int, int>, const ForecastRecord*> bench;
  for (const auto& r : recs[0]) bench[{r.origin, r.horizon}] = &r;
  for (const auto& v : recs) res.records.insert(res.records.end(), v.begin(), v.end());

  const int N = panel.N();
  for (ModelKind m : plan.models) {
    const auto k = static_cast<std::size_t>(std::find(kinds.begin(), kinds.end(), m) - kinds.begin());
    for (int h : plan.horizons) {
      Eigen::VectorXd se_m = Eigen::VectorXd::Zero(N);
      Eigen::VectorXd se_b = Eigen::VectorXd::Zero(N);
      Eigen::VectorXd lm = Eigen::VectorXd::Zero(N);
      Eigen::VectorXd lb = Eigen::VectorXd::Zero(N);
      double jm = 0.0;
      double jb = 0.0;
      double jse_m = 0.0;
      double jse_b = 0.0;
      int count = 0;
      for (const auto& r : recs[k]) {
        if (r.horizon != h) continue;
        const ForecastRecord& b = *bench.at({r.origin, h});
        const Eigen::VectorXd em = r.mean - r.realized;
        const Eigen::VectorXd eb = b.mean - b.realized;
        for (int i = 0; i < N; ++i) {
          res.scores.push_back(ScoreRow{r.model, panel.countries[static_cast<std::size_t>(i)], h, r.origin,
                                        ratio(std::abs(em[i]), std::abs(eb[i])), r.lps[i] - b.lps[i], r.lps[i],
                                        b.lps[i]});
        }
        res.scores.push_back(
            ScoreRow{r.model, "joint", h, r.origin, ratio(em.norm(), eb.norm()), r.joint - b.joint, r.joint, b.joint});
        se_m += em.cwiseAbs2();
        se_b += eb.cwiseAbs2();
        lm += r.lps;
        lb += b.lps;
        jm += r.joint;
        jb += b.joint;
        jse_m += em.squaredNorm();
        jse_b += eb.squaredNorm();
        ++count;
      }
      if (count == 0) continue;
      const std::string name = model_name(m);
      for (int i = 0; i < N; ++i) {
        res.aggregate.push_back(ScoreRow{name, panel.countries[static_cast<std::size_t>(i)], h, -1,
                                         ratio(std::sqrt(se_m[i]), std::sqrt(se_b[i])), (lm[i] - lb[i]) / count,
                                         lm[i] / count, lb[i] / count});
      }
      res.aggregate.push_back(ScoreRow{name, "joint", h, -1, ratio(std::sqrt(jse_m), std::sqrt(jse_b)),
                                       (jm - jb) / count, jm / count, jb / count});
    }
  }
  return res;
}

void write_scores_csv(const std::string& path, const std::vector<ScoreRow>& rows, bool aggregate) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io_error, "cannot write " + path);
  out.precision(12);
  out << "model,country,horizon,origin,rmse_rel,lps_diff";
  if (aggregate) out << ",lps_model,lps_benchmark";
  out << '\n';
  for (const auto& r : rows) {
    out << r.model << ',' << r.country << ',' << r.horizon << ',' << r.origin << ',' << r.rmse_rel << ','
        << r.lps_diff;
    if (aggregate) out << ',' << r.lps_model << ',' << r.lps_benchmark;
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::io_error, "short write on " + path);
}

}  // namespace pvarmix
