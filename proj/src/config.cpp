#include "pvarmix/config.hpp"

#include "pvarmix/distributions.hpp"
#include "pvarmix/error.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace pvarmix {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  require(ec == std::errc() && p == v.data() + v.size() && !v.empty(), ErrorKind::config_error,
          "bad value '" + raw + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorKind::config_error, "bad boolean '" + raw + "' for " + key);
}

std::string fmt(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}
std::string fmt(int x) { return std::to_string(x); }
std::string fmt(std::uint64_t x) { return std::to_string(x); }
std::string fmt(bool x) { return x ? "true" : "false"; }
std::string fmt(const std::string& x) { return x; }

std::string fmt(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? "," : "") + fmt(v[k]);
  return s;
}

Eigen::VectorXd parse_vector(const std::string& s) {
  const auto d = parse_double_list(s);
  return Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
}

struct Entry {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class T, class Access>
Entry field(std::string name, Access acc) {
  Entry e;
  e.name = name;
  e.get = [acc](const RunConfig& c) { return fmt(acc(const_cast<RunConfig&>(c))); };
  e.set = [acc, name](RunConfig& c, const std::string& v) {
    T& ref = acc(c);
    if constexpr (std::is_same_v<T, bool>) {
      ref = parse_bool(name, v);
    } else if constexpr (std::is_same_v<T, std::string>) {
      ref = trim(v);
    } else {
      ref = parse_number<T>(name, v);
    }
  };
  return e;
}

#define PV_FIELD(T, key, expr) field<T>(key, [](RunConfig& c) -> T& { return expr; })

const std::vector<Entry>& registry() {
  static const std::vector<Entry> reg = [] {
    std::vector<Entry> r{
        PV_FIELD(std::string, "command", c.command),
        PV_FIELD(std::string, "data", c.data),
        PV_FIELD(std::string, "out", c.out),
        PV_FIELD(int, "threads", c.threads),
        PV_FIELD(std::uint64_t, "seed", c.model.seed),
        PV_FIELD(int, "P", c.model.P),
        PV_FIELD(int, "q", c.model.q),
        PV_FIELD(int, "G", c.model.G),
        PV_FIELD(double, "w0", c.model.w0),
        PV_FIELD(double, "w1", c.model.w1),
        PV_FIELD(double, "nu1", c.model.nu1),
        PV_FIELD(double, "nu2", c.model.nu2),
        PV_FIELD(double, "c0", c.model.c0),
        PV_FIELD(double, "cc0", c.model.cc0),
        PV_FIELD(double, "cc1", c.model.cc1),
        PV_FIELD(double, "vartheta", c.model.vartheta),
        PV_FIELD(double, "sv_phi_mean", c.model.sv_phi_mean),
        PV_FIELD(double, "sv_phi_var", c.model.sv_phi_var),
        PV_FIELD(double, "sv_sigma_shape", c.model.sv_sigma_shape),
        PV_FIELD(double, "sv_sigma_rate", c.model.sv_sigma_rate),
        PV_FIELD(double, "sv_rho_a", c.model.sv_rho_a),
        PV_FIELD(double, "sv_rho_b", c.model.sv_rho_b),
        PV_FIELD(double, "loading_var", c.model.loading_var),
        PV_FIELD(double, "intercept_var", c.model.intercept_var),
        PV_FIELD(int, "draws", c.model.draws),
        PV_FIELD(int, "burnin", c.model.burnin),
        PV_FIELD(int, "thin", c.model.thin),
        PV_FIELD(double, "p0_tuning", c.model.p0_tuning),
        PV_FIELD(bool, "adapt_p0", c.model.adapt_p0),
        PV_FIELD(bool, "sample_p0", c.model.sample_p0),
        PV_FIELD(bool, "xi_rate_literal", c.model.xi_rate_literal),
        PV_FIELD(int, "ident_coord", c.model.ident_coord),
        PV_FIELD(bool, "store_paths", c.model.store_paths),
        PV_FIELD(bool, "likelihood_free", c.model.likelihood_free),
        PV_FIELD(double, "fixed_range", c.model.fixed_range),
        PV_FIELD(double, "mu0_prior_var", c.model.mu0_prior_var),
        PV_FIELD(int, "dgp_N", c.dgp.N),
        PV_FIELD(int, "dgp_M", c.dgp.M),
        PV_FIELD(int, "dgp_P", c.dgp.P),
        PV_FIELD(int, "dgp_T", c.dgp.T),
        PV_FIELD(double, "dgp_v", c.dgp.v_true),
        PV_FIELD(double, "dgp_b_var", c.dgp.b_var),
        PV_FIELD(double, "dgp_sparsity", c.dgp.sparsity),
        PV_FIELD(int, "dgp_q", c.dgp.q),
        PV_FIELD(double, "dgp_h_phi", c.dgp.sv_h.phi),
        PV_FIELD(double, "dgp_h_rho", c.dgp.sv_h.rho),
        PV_FIELD(double, "dgp_h_sigma", c.dgp.sv_h.sigma),
        PV_FIELD(double, "dgp_omega_phi", c.dgp.sv_omega.phi),
        PV_FIELD(double, "dgp_omega_rho", c.dgp.sv_omega.rho),
        PV_FIELD(double, "dgp_omega_sigma", c.dgp.sv_omega.sigma),
        PV_FIELD(double, "dgp_loading_var", c.dgp.loading_var),
        PV_FIELD(int, "dgp_burnin", c.dgp.burnin),
        PV_FIELD(bool, "dgp_zero_shocks", c.dgp.zero_shocks),
        PV_FIELD(int, "dgp_replications", c.dgp.replications),
        PV_FIELD(bool, "experiment", c.experiment),
        PV_FIELD(std::string, "estimators", c.estimators),
        PV_FIELD(std::string, "T_grid", c.T_grid),
        PV_FIELD(std::string, "sparsity_grid", c.sparsity_grid),
        PV_FIELD(int, "train_end", c.train_end),
        PV_FIELD(std::string, "horizons", c.horizons),
        PV_FIELD(std::string, "models", c.models),
        PV_FIELD(std::string, "benchmark", c.benchmark),
        PV_FIELD(int, "target_variable", c.target_variable),
        PV_FIELD(bool, "warm_start", c.warm_start),
        PV_FIELD(int, "paths_per_draw", c.paths_per_draw),
    };
    r.push_back(Entry{"prior",
                      [](const RunConfig& c) {
                        return std::string(c.model.prior == PriorKind::mixture ? "mixture" : "lagwise_ng");
                      },
                      [](RunConfig& c, const std::string& v) {
                        const std::string t = trim(v);
                        if (t == "mixture") c.model.prior = PriorKind::mixture;
                        else if (t == "lagwise_ng") c.model.prior = PriorKind::lagwise_ng;
                        else fail(ErrorKind::config_error, "prior must be mixture or lagwise_ng");
                      }});
    r.push_back(Entry{"ident",
                      [](const RunConfig& c) {
                        return std::string(c.model.ident == IdentScheme::coordinate ? "coordinate" : "weight");
                      },
                      [](RunConfig& c, const std::string& v) {
                        const std::string t = trim(v);
                        if (t == "coordinate") c.model.ident = IdentScheme::coordinate;
                        else if (t == "weight") c.model.ident = IdentScheme::weight;
                        else fail(ErrorKind::config_error, "ident must be coordinate or weight");
                      }});
    r.push_back(Entry{"dgp_w", [](const RunConfig& c) { return fmt(c.dgp.w_true); },
                      [](RunConfig& c, const std::string& v) { c.dgp.w_true = parse_vector(v); }});
    r.push_back(Entry{"dgp_mu",
                      [](const RunConfig& c) {
                        std::string s;
                        for (std::size_t g = 0; g < c.dgp.mu_true.size(); ++g) s += (g ? ";" : "") + fmt(c.dgp.mu_true[g]);
                        return s;
                      },
                      [](RunConfig& c, const std::string& v) {
                        c.dgp.mu_true.clear();
                        std::stringstream ss(v);
                        std::string part;
                        while (std::getline(ss, part, ';')) c.dgp.mu_true.push_back(parse_vector(part));
                      }});
    r.push_back(PV_FIELD(std::uint64_t, "dgp_seed", c.dgp.seed));
    return r;
  }();
  return reg;
}

#undef PV_FIELD

const Entry& lookup(const std::string& key) {
  for (const auto& e : registry())
    if (e.name == key) return e;
  fail(ErrorKind::config_error, "unknown key '" + key + "'");
}

}  // namespace

RunConfig::RunConfig() {
  // desk-scale chain lengths
  model.draws = 5000;
  model.burnin = 2500;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> k;
  for (const auto& e : registry()) k.push_back(e.name);
  return k;
}

std::string get_config(const RunConfig& c, const std::string& key) { return lookup(key).get(c); }

void set_config(RunConfig& c, const std::string& key, const std::string& value) { lookup(trim(key)).set(c, value); }

void apply_assignment(RunConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos, ErrorKind::config_error, "expected key=value, got '" + assignment + "'");
  set_config(c, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void load_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io_error, "cannot read " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    try {
      apply_assignment(c, line);
    } catch (const Error& e) {
      fail(ErrorKind::config_error, path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void dump_config(const RunConfig& c, std::ostream& out) {
  for (const auto& e : registry()) out << e.name << " = " << e.get(c) << '\n';
}

std::uint64_t config_hash(const ModelConfig& m) {
  RunConfig c;
  c.model = m;
  std::string text;
  for (const auto& e : registry()) {
    if (e.name == "command" || e.name == "data" || e.name == "out" || e.name == "threads" ||
        e.name.rfind("dgp_", 0) == 0)
      continue;
    text += e.name + "=" + e.get(c) + "\n";
  }
  return hash_label(text);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& p : split_list(s)) out.push_back(parse_number<int>("list", p));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split_list(s)) out.push_back(parse_number<double>("list", p));
  return out;
}

}  // namespace pvarmix
