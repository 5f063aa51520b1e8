#include "pvarmix/draw_store.hpp"

#include "pvarmix/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace pvarmix {

namespace {

constexpr char kMagic[4] = {'P', 'V', 'M', 'B'};
constexpr std::uint32_t kVersion = 1;

Eigen::MatrixXd reshape(const double* row, const std::vector<int>& shape) {
  const int rows = shape.empty() ? 1 : shape[0];
  int cols = 1;
  for (std::size_t k = 1; k < shape.size(); ++k) cols *= shape[k];
  Eigen::MatrixXd out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out(r, c) = row[r * cols + c];
  return out;
}

}  // namespace

double StoreMeta::stat(const std::string& name, double fallback) const {
  for (const auto& [k, v] : stats)
    if (k == name) return v;
  return fallback;
}

int DrawStore::Block::size() const {
  int s = 1;
  for (int d : shape) s *= d;
  return s;
}

void DrawStore::add_block(const std::string& name, std::vector<int> shape) {
  require(!has(name), ErrorKind::invalid_parameter, "duplicate block " + name);
  blocks_.push_back(Block{name, std::move(shape), {}});
}

bool DrawStore::has(const std::string& name) const {
  return std::any_of(blocks_.begin(), blocks_.end(), [&](const Block& b) { return b.name == name; });
}

const DrawStore::Block& DrawStore::block(const std::string& name) const {
  for (const auto& b : blocks_)
    if (b.name == name) return b;
  fail(ErrorKind::invalid_parameter, "no block named " + name);
}

DrawStore::Block& DrawStore::mutable_block(const std::string& name) {
  for (auto& b : blocks_)
    if (b.name == name) return b;
  fail(ErrorKind::invalid_parameter, "no block named " + name);
}

void DrawStore::append(const std::string& name, const double* values, int n) {
  Block& b = mutable_block(name);
  require(n == b.size(), ErrorKind::dimension_mismatch, "draw size for block " + name);
  b.data.insert(b.data.end(), values, values + n);
}

void DrawStore::append(const std::string& name, const Eigen::MatrixXd& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  append(name, rm.data(), static_cast<int>(rm.size()));
}

int DrawStore::retained() const {
  if (blocks_.empty()) return 0;
  const Block& b = blocks_.front();
  return b.size() == 0 ? 0 : static_cast<int>(b.data.size()) / b.size();
}

DrawStore::Table DrawStore::table(const std::string& name) const {
  const Block& b = block(name);
  const int n = b.size();
  const int d = n == 0 ? 0 : static_cast<int>(b.data.size()) / n;
  return Eigen::Map<const Table>(b.data.data(), d, n);
}

Eigen::MatrixXd DrawStore::draw(const std::string& name, int d) const {
  const Block& b = block(name);
  require(d >= 0 && d < retained(), ErrorKind::invalid_parameter, "draw index out of range");
  return reshape(b.data.data() + static_cast<std::size_t>(d) * b.size(), b.shape);
}

Eigen::MatrixXd DrawStore::median(const std::string& name) const {
  const Block& b = block(name);
  const Table t = table(name);
  require(t.rows() > 0, ErrorKind::insufficient_draws, "empty block " + name);
  std::vector<double> flat(static_cast<std::size_t>(t.cols()));
  std::vector<double> col(static_cast<std::size_t>(t.rows()));
  for (Eigen::Index c = 0; c < t.cols(); ++c) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) col[static_cast<std::size_t>(r)] = t(r, c);
    const std::size_t h = col.size() / 2;
    std::nth_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(h), col.end());
    double med = col[h];
    if (col.size() % 2 == 0) {
      const double lo = *std::max_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(h));
      med = 0.5 * (med + lo);
    }
    flat[static_cast<std::size_t>(c)] = med;
  }
  return reshape(flat.data(), b.shape);
}

Eigen::MatrixXd DrawStore::mean(const std::string& name) const {
  const Block& b = block(name);
  const Table t = table(name);
  require(t.rows() > 0, ErrorKind::insufficient_draws, "empty block " + name);
  const Eigen::RowVectorXd m = t.colwise().mean();
  return reshape(m.data(), b.shape);
}

void DrawStore::save(const std::string& dir) const {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::io_error, "cannot create " + dir);
  nlohmann::json j;
  j["model"] = meta.model;
  j["config_hash"] = meta.config_hash;
  j["seed"] = meta.seed;
  j["stream"] = meta.stream;
  j["draws"] = meta.draws;
  j["burnin"] = meta.burnin;
  j["thin"] = meta.thin;
  j["retained"] = retained();
  j["N"] = meta.N;
  j["M"] = meta.M;
  j["P"] = meta.P;
  j["q"] = meta.q;
  j["G"] = meta.G;
  j["countries"] = meta.countries;
  j["variables"] = meta.variables;
  nlohmann::json stats = nlohmann::json::object();
  for (const auto& [k, v] : meta.stats) stats[k] = v;
  j["stats"] = stats;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : blocks_) {
    blocks.push_back({{"name", b.name}, {"shape", b.shape}, {"file", b.name + ".bin"}});
    std::ofstream out(fs::path(dir) / (b.name + ".bin"), std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::io_error, "cannot write block " + b.name);
    const std::uint64_t rows = static_cast<std::uint64_t>(b.size() == 0 ? 0 : b.data.size() / b.size());
    const std::uint64_t cols = static_cast<std::uint64_t>(b.size());
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    std::vector<double> column(rows);
    for (std::uint64_t c = 0; c < cols; ++c) {
      for (std::uint64_t r = 0; r < rows; ++r) column[r] = b.data[r * cols + c];
      out.write(reinterpret_cast<const char*>(column.data()), static_cast<std::streamsize>(rows * sizeof(double)));
    }
    require(static_cast<bool>(out), ErrorKind::io_error, "short write on block " + b.name);
  }
  j["blocks"] = blocks;
  std::ofstream mf(fs::path(dir) / "meta.json");
  require(static_cast<bool>(mf), ErrorKind::io_error, "cannot write meta.json");
  mf << j.dump(2) << "\n";
}

DrawStore DrawStore::load(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "meta.json");
  require(static_cast<bool>(mf), ErrorKind::io_error, "cannot read " + dir + "/meta.json");
  nlohmann::json j;
  try {
    mf >> j;
  } catch (const std::exception& e) {
    fail(ErrorKind::io_error, std::string("malformed meta.json: ") + e.what());
  }
  DrawStore s;
  s.meta.model = j.value("model", "");
  s.meta.config_hash = j.value("config_hash", std::uint64_t{0});
  s.meta.seed = j.value("seed", std::uint64_t{0});
  s.meta.stream = j.value("stream", std::uint64_t{0});
  s.meta.draws = j.value("draws", 0);
  s.meta.burnin = j.value("burnin", 0);
  s.meta.thin = j.value("thin", 1);
  s.meta.N = j.value("N", 0);
  s.meta.M = j.value("M", 0);
  s.meta.P = j.value("P", 1);
  s.meta.q = j.value("q", 0);
  s.meta.G = j.value("G", 0);
  s.meta.countries = j.value("countries", std::vector<std::string>{});
  s.meta.variables = j.value("variables", std::vector<std::string>{});
  if (j.contains("stats"))
    for (auto it = j["stats"].begin(); it != j["stats"].end(); ++it) s.meta.stats.emplace_back(it.key(), it.value().get<double>());
  for (const auto& bj : j.at("blocks")) {
    Block b{bj.at("name"), bj.at("shape").get<std::vector<int>>(), {}};
    std::ifstream in(fs::path(dir) / bj.at("file").get<std::string>(), std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::io_error, "cannot read block " + b.name);
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    require(in && std::memcmp(magic, kMagic, 4) == 0 && version == kVersion &&
                cols == static_cast<std::uint64_t>(b.size()),
            ErrorKind::io_error, "bad header in block " + b.name);
    b.data.assign(rows * cols, 0.0);
    std::vector<double> column(rows);
    for (std::uint64_t c = 0; c < cols; ++c) {
      in.read(reinterpret_cast<char*>(column.data()), static_cast<std::streamsize>(rows * sizeof(double)));
      for (std::uint64_t r = 0; r < rows; ++r) b.data[r * cols + c] = column[r];
    }
    require(static_cast<bool>(in), ErrorKind::io_error, "truncated block " + b.name);
    s.blocks_.push_back(std::move(b));
  }
  return s;
}

void DrawStore::export_csv(const std::string& path) const {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io_error, "cannot write " + path);
  out.precision(17);
  out << "draw";
  for (const auto& b : blocks_) {
    const int cols = b.shape.size() > 1 ? b.size() / b.shape[0] : 1;
    for (int k = 0; k < b.size(); ++k) {
      out << ',' << b.name << '[' << (b.shape.size() > 1 ? std::to_string(k / cols) + "," + std::to_string(k % cols)
                                                         : std::to_string(k))
          << ']';
    }
  }
  out << '\n';
  const int n = retained();
  for (int d = 0; d < n; ++d) {
    out << d;
    for (const auto& b : blocks_) {
      const std::size_t off = static_cast<std::size_t>(d) * b.size();
      for (int k = 0; k < b.size(); ++k) out << ',' << b.data[off + k];
    }
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::io_error, "short write on " + path);
}

}  // namespace pvarmix
