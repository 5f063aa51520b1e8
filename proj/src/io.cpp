#include "pvarmix/io.hpp"

#include "pvarmix/error.hpp"
#include "pvarmix/mixture.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace pvarmix {

namespace {

std::string fmt(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

int index_of(std::vector<std::string>& labels, const std::string& s) {
  const auto it = std::find(labels.begin(), labels.end(), s);
  if (it != labels.end()) return static_cast<int>(it - labels.begin());
  labels.push_back(s);
  return static_cast<int>(labels.size()) - 1;
}

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

PanelData read_panel_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io_error, "cannot read " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::io_error, path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "date,country,variable,value", ErrorKind::io_error,
          path + ":1: header must be date,country,variable,value");
  static const std::regex month(R"(\d{4}-(0[1-9]|1[0-2]))");
  struct Cell {
    std::string date;
    int country;
    int variable;
    double value;
    int line;
  };
  std::vector<Cell> cells;
  PanelData p;
  std::vector<std::string> dates;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    const std::string where = path + " line " + std::to_string(lineno) + ": ";
    require(f.size() == 4, ErrorKind::io_error, where + "expected 4 fields");
    require(std::regex_match(f[0], month), ErrorKind::io_error, where + "date must be YYYY-MM");
    require(!f[1].empty() && !f[2].empty(), ErrorKind::io_error, where + "empty label");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), v);
    require(ec == std::errc() && ptr == f[3].data() + f[3].size() && std::isfinite(v), ErrorKind::io_error,
            where + "value is not a finite number");
    cells.push_back({f[0], index_of(p.countries, f[1]), index_of(p.variables, f[2]), v, lineno});
    if (std::find(dates.begin(), dates.end(), f[0]) == dates.end()) dates.push_back(f[0]);
  }
  require(!cells.empty(), ErrorKind::io_error, path + ": no data rows");
  std::sort(dates.begin(), dates.end());
  std::map<std::string, int> row;
  for (std::size_t t = 0; t < dates.size(); ++t) row[dates[t]] = static_cast<int>(t);
  const int M = p.M();
  p.Y = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(dates.size()), p.K(), std::nan(""));
  Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(p.Y.rows(), p.Y.cols());
  for (const auto& c : cells) {
    const int t = row[c.date];
    const int col = c.country * M + c.variable;
    require(seen(t, col) == 0, ErrorKind::io_error, path + " line " + std::to_string(c.line) + ": duplicate cell");
    seen(t, col) = 1;
    p.Y(t, col) = c.value;
  }
  for (Eigen::Index t = 0; t < seen.rows(); ++t)
    for (Eigen::Index k = 0; k < seen.cols(); ++k)
      require(seen(t, k) == 1, ErrorKind::io_error,
              path + ": missing value for " + dates[static_cast<std::size_t>(t)] + " " +
                  p.countries[static_cast<std::size_t>(k / M)] + " " + p.variables[static_cast<std::size_t>(k % M)]);
  p.dates = std::move(dates);
  p.validate();
  return p;
}

void write_panel_csv(const std::string& path, const PanelData& panel) {
  panel.validate();
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io_error, "cannot write " + path);
  out << "date,country,variable,value\n";
  const int M = panel.M();
  for (int t = 0; t < panel.T(); ++t)
    for (int i = 0; i < panel.N(); ++i)
      for (int j = 0; j < M; ++j)
        out << panel.dates[static_cast<std::size_t>(t)] << ',' << panel.countries[static_cast<std::size_t>(i)] << ','
            << panel.variables[static_cast<std::size_t>(j)] << ',' << fmt(panel.Y(t, i * M + j)) << '\n';
  require(static_cast<bool>(out), ErrorKind::io_error, "short write on " + path);
}

void write_truth(const std::string& path, const DgpTruth& truth, const PanelData& panel) {
  nlohmann::json j;
  auto mat = [](const Eigen::MatrixXd& m) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
      a.push_back(row);
    }
    return a;
  };
  j["countries"] = panel.countries;
  j["variables"] = panel.variables;
  j["coefficients"] = mat(truth.A);
  j["delta"] = truth.delta;
  j["mu"] = mat(truth.mu);
  j["w"] = std::vector<double>(truth.w.data(), truth.w.data() + truth.w.size());
  j["stationarity_redraws"] = truth.redraws;
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io_error, "cannot write " + path);
  out << j.dump(2) << '\n';
  require(static_cast<bool>(out), ErrorKind::io_error, "short write on " + path);
}

void write_fit_summary(const std::string& dir, const DrawStore& store, IdentScheme scheme, int coord) {
  namespace fs = std::filesystem;
  const int D = store.retained();
  require(D > 0, ErrorKind::insufficient_draws, "store holds no draws");
  {
    std::ofstream out(fs::path(dir) / "summary.csv");
    require(static_cast<bool>(out), ErrorKind::io_error, "cannot write summary.csv");
    out << "block,index,mean,median,q05,q95\n";
    for (const auto& b : store.blocks()) {
      if (b.name.rfind("path_", 0) == 0 || b.size() == 0) continue;
      const auto t = store.table(b.name);
      std::vector<double> col(static_cast<std::size_t>(D));
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        for (int d = 0; d < D; ++d) col[static_cast<std::size_t>(d)] = t(d, c);
        out << b.name << ',' << c << ',' << fmt(t.col(c).mean()) << ',' << fmt(quantile(col, 0.5)) << ','
            << fmt(quantile(col, 0.05)) << ',' << fmt(quantile(col, 0.95)) << '\n';
      }
    }
    require(static_cast<bool>(out), ErrorKind::io_error, "short write on summary.csv");
  }
  if (!store.has("mixture_delta")) return;

  const int G = store.block("mixture_w").shape[0];
  const int N = store.block("mixture_delta").shape[0];
  const int m = store.block("mixture_mu").shape[0];
  const auto Wt = store.table("mixture_w");
  const auto Dt = store.table("mixture_delta");
  const auto Mt = store.table("mixture_mu");
  std::vector<double> gstar(static_cast<std::size_t>(G), 0.0);
  std::vector<double> dmean(static_cast<std::size_t>(N), 0.0);
  std::vector<int> delta(static_cast<std::size_t>(N));
  for (int d = 0; d < D; ++d) {
    for (int i = 0; i < N; ++i) delta[static_cast<std::size_t>(i)] = static_cast<int>(Dt(d, i));
    const Eigen::MatrixXd mu =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(Mt.row(d).data(), m, G);
    const auto lab = identified_labels(Wt.row(d).transpose(), mu, delta, scheme, coord);
    gstar[static_cast<std::size_t>(active_clusters(delta, G) - 1)] += 1.0 / D;
    for (int i = 0; i < N; ++i)
      dmean[static_cast<std::size_t>(i)] += (lab[static_cast<std::size_t>(delta[static_cast<std::size_t>(i)])] + 1.0) / D;
  }
  std::ofstream gs(fs::path(dir) / "gstar.csv");
  gs << "g,prob\n";
  for (int g = 0; g < G; ++g) gs << g + 1 << ',' << fmt(gstar[static_cast<std::size_t>(g)]) << '\n';
  std::ofstream dm(fs::path(dir) / "delta_mean.csv");
  dm << "country,delta_mean\n";
  for (int i = 0; i < N; ++i)
    dm << (i < static_cast<int>(store.meta.countries.size()) ? store.meta.countries[static_cast<std::size_t>(i)]
                                                              : std::to_string(i + 1))
       << ',' << fmt(dmean[static_cast<std::size_t>(i)]) << '\n';

  const auto Lt = store.table("mixture_lambda");
  const int M = store.meta.M > 0 ? store.meta.M : 1;
  const int width = m / M;
  std::ofstream ll(fs::path(dir) / "log_lambda.csv");
  ll << "coordinate,equation,regressor,q05,q25,median,q75,q95\n";
  std::vector<double> col(static_cast<std::size_t>(D));
  for (int j = 0; j < m; ++j) {
    for (int d = 0; d < D; ++d) col[static_cast<std::size_t>(d)] = std::log(Lt(d, j));
    const int eq = j / width;
    const int r = j % width;
    std::string reg = "intercept";
    if (r > 0) {
      const int lag = (r - 1) / M + 1;
      const int v = (r - 1) % M;
      const std::string vn = v < static_cast<int>(store.meta.variables.size()) ? store.meta.variables[static_cast<std::size_t>(v)]
                                                                              : std::to_string(v + 1);
      reg = vn + "_lag" + std::to_string(lag);
    }
    const std::string en = eq < static_cast<int>(store.meta.variables.size()) ? store.meta.variables[static_cast<std::size_t>(eq)]
                                                                             : std::to_string(eq + 1);
    ll << j << ',' << en << ',' << reg << ',' << fmt(quantile(col, 0.05)) << ',' << fmt(quantile(col, 0.25)) << ','
       << fmt(quantile(col, 0.5)) << ',' << fmt(quantile(col, 0.75)) << ',' << fmt(quantile(col, 0.95)) << '\n';
  }
  require(gs && dm && ll, ErrorKind::io_error, "short write on fit summary");
}

}  // namespace pvarmix
