#include "pvarmix/forecast.hpp"
#include "pvarmix/simlab.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <regex>
#include <string>
#include <vector>

using namespace pvarmix;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << detail << std::endl;
  if (!ok) ++failures;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Runs a doctest binary restricted to the given test cases; returns the number
// of cases that ran, or -1 when any failed.
int run_cases(const std::string& binary, const std::string& filter) {
  const std::string cmd = binary + " --test-case=\"" + filter + "\" 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string out;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int status = pclose(pipe);
  std::smatch m;
  const std::regex summary(R"(test cases:\s*(\d+)\s*\|\s*(\d+) passed)");
  if (!std::regex_search(out, m, summary)) return -1;
  const int ran = std::stoi(m[1]);
  const int passed = std::stoi(m[2]);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0 || passed != ran) {
    std::cout << out;
    return -1;
  }
  return ran;
}

void simulation_criteria() {
  const DgpSpec spec = DgpSpec::desk();
  ExperimentPlan plan;
  plan.replications = spec.replications;
  plan.model.draws = 5000;
  plan.model.burnin = 2500;
  plan.model.G = 8;
  const auto rows = run_experiment(spec, plan);

  std::map<std::string, std::vector<const ExperimentRow*>> by;
  int errors = 0;
  for (const auto& r : rows) {
    by[r.estimator].push_back(&r);
    if (!r.error.empty()) {
      std::cout << "replication " << r.replication << " " << r.estimator << " failed: " << r.error << "\n";
      ++errors;
    }
  }
  const int R = plan.replications;
  auto rmse = [&](const char* e, int r) { return by[e][static_cast<std::size_t>(r)]->rmse; };

  int ordered = 0;
  std::map<std::string, std::vector<double>> all;
  for (int r = 0; r < R; ++r) {
    const double a = rmse("pvar_mix", r), b = rmse("pvar_g1", r), c = rmse("var_ng", r), d = rmse("var_ols", r);
    if (a <= b && b <= c && c <= d) ++ordered;
    all["mix"].push_back(a);
    all["ols"].push_back(d);
  }
  const double med_mix = median(all["mix"]), med_ols = median(all["ols"]);
  report(1, errors == 0 && ordered >= 8 && med_mix < 0.5 * med_ols,
         "ordering holds in " + std::to_string(ordered) + "/" + std::to_string(R) + " replications; median rmse mix " +
             fmt(med_mix) + " vs ols " + fmt(med_ols));

  std::vector<double> qps;
  double allocated = 0.0, ineff = 0.0;
  int gstar2 = 0, contrast = 0;
  for (const ExperimentRow* r : by["pvar_mix"]) {
    qps.push_back(r->qps);
    allocated += r->share_allocated;
    ineff += r->share_ineff_below_30;
    if (r->gstar_mode == 2) ++gstar2;
    const Eigen::VectorXd& ll = r->log_lambda_median;
    if (ll.size() == 6) {
      const double equal = std::max(ll[2], ll[5]);
      bool below = true;
      for (int j : {0, 1, 3, 4}) below = below && equal < ll[j];
      if (below) ++contrast;
    }
  }
  allocated /= R;
  ineff /= R;
  const double med_qps = median(qps);
  report(2, med_qps <= 0.25 && allocated >= 0.8,
         "median qps " + fmt(med_qps) + "; share of countries allocated with probability > 0.9: " + fmt(allocated));
  report(3, gstar2 >= 8, "posterior mode of G* is 2 in " + std::to_string(gstar2) + "/" + std::to_string(R));
  report(4, contrast >= 8,
         "equal slots have the smallest median log lambda in " + std::to_string(contrast) + "/" + std::to_string(R));
  report(6, ineff >= 0.7, "share of coefficient chains with inefficiency below 30: " + fmt(ineff));
}

void sampler_criterion() {
  const int sampler = run_cases(TEST_SAMPLER_PATH, "getting it right*,covariance stays positive definite*");
  const int dists = run_cases(TEST_DISTRIBUTIONS_PATH,
                              "gig first two moments*,gig in the regimes*,dirichlet moments*,*inverse gamma and beta*");
  const int panel = run_cases(TEST_PANEL_PATH, "conditional loglik is invariant to label permutations");
  report(5, sampler == 2 && dists == 4 && panel == 1,
         "getting-it-right and positive definite smoke " + std::to_string(sampler) + "/2, moment suites " +
             std::to_string(dists) + "/4, permutation invariance " + std::to_string(panel) + "/1");
}

void forecast_criterion() {
  const DgpSpec spec = DgpSpec::desk();
  RngStream rng(spec.seed, 1);
  const auto [panel, truth] = generate_dgp(spec, rng);
  ModelConfig cfg;
  cfg.draws = 300;
  cfg.burnin = 100;
  EvaluationPlan self;
  self.train_end = spec.T - 3;
  self.horizons = {1, 2};
  self.models = {ModelKind::ar1_sv};
  double worst_rel = 0.0, worst_diff = 0.0;
  for (const auto& s : recursive_evaluation(panel, cfg, self).scores) {
    worst_rel = std::max(worst_rel, std::abs(s.rmse_rel - 1.0));
    worst_diff = std::max(worst_diff, std::abs(s.lps_diff));
  }
  const bool identity = worst_rel <= 1e-12 && worst_diff <= 1e-12;

  // ten panels drawn from the two-component mixture, ten one-step origins each
  double mix = 0.0, g1 = 0.0;
  const int R = 10;
  for (int r = 0; r < R; ++r) {
    RngStream prng(spec.seed, hash_label("lps") ^ static_cast<std::uint64_t>(r));
    const auto [p, t] = generate_dgp(spec, prng);
    ModelConfig c;
    c.draws = 1500;
    c.burnin = 500;
    c.seed = 100 + static_cast<std::uint64_t>(r);
    EvaluationPlan plan;
    plan.train_end = spec.T - 10;
    plan.horizons = {1};
    plan.models = {ModelKind::pvar_mix, ModelKind::pvar_g1};
    for (const auto& a : recursive_evaluation(p, c, plan).aggregate) {
      if (a.country != "joint") continue;
      if (a.model == "pvar_mix") mix += a.lps_model / R;
      if (a.model == "pvar_g1") g1 += a.lps_model / R;
    }
  }
  report(7, identity && mix >= g1,
         "benchmark against itself: max |rmse_rel - 1| " + fmt(worst_rel) + ", max |lps_diff| " + fmt(worst_diff) +
             "; average joint lps mix " + fmt(mix) + " vs g1 " + fmt(g1));
}

}  // namespace

int main() {
  try {
    sampler_criterion();
    simulation_criteria();
    forecast_criterion();
  } catch (const std::exception& e) {
    std::cout << "FAIL aborted: " << e.what() << std::endl;
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
