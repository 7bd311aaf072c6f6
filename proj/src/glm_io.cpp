#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "mcmcperf/glm.hpp"
#include "mcmcperf/rng.hpp"

namespace mcmcperf::glm {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

bool all_text(const std::vector<std::string>& fields) {
  for (const auto& f : fields) {
    double v;
    if (parse_double(f, v)) return false;
  }
  return true;
}

}  // namespace

DesignMatrix read_csv(std::istream& in, const std::string& source_name) {
  std::vector<double> x, y;
  std::size_t k = 0, rows = 0, line_no = 0;
  bool seen_data = false;
  std::string line;
  auto fail = [&](std::size_t col, const std::string& what) {
    std::ostringstream os;
    os << source_name << ":" << line_no;
    if (col) os << ":" << col;
    os << ": " << what;
    throw InputError(os.str());
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto fields = split_fields(line);
    if (!seen_data && rows == 0 && all_text(fields)) {
      seen_data = true;  // header
      continue;
    }
    seen_data = true;
    if (fields.size() < 2) fail(0, "need at least one covariate and a response column");
    if (k == 0) k = fields.size() - 1;
    if (fields.size() != k + 1) {
      fail(0, "expected " + std::to_string(k + 1) + " columns, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < k; ++c) {
      double v;
      if (!parse_double(fields[c], v) || !std::isfinite(v)) {
        fail(c + 1, "invalid covariate '" + fields[c] + "'");
      }
      x.push_back(v);
    }
    double r;
    if (!parse_double(fields[k], r) || (r != 0.0 && r != 1.0)) {
      fail(k + 1, "response must be 0 or 1, got '" + fields[k] + "'");
    }
    y.push_back(r);
    ++rows;
  }
  if (rows == 0) throw InputError(source_name + ": no data rows");
  return DesignMatrix(rows, k, std::move(x), std::move(y));
}

DesignMatrix read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_csv(in, path);
}

void write_csv(std::ostream& out, const DesignMatrix& data) {
  const auto old = out.precision(17);
  for (std::size_t n = 0; n < data.n_rows(); ++n) {
    for (std::size_t k = 0; k < data.n_cols(); ++k) out << data.at(n, k) << ',';
    out << static_cast<int>(data.y()[n]) << '\n';
  }
  out.precision(old);
}

SyntheticGlm synthetic_glm(std::size_t n_rows, std::span<const double> beta_true,
                           std::uint64_t seed) {
  const std::size_t k = beta_true.size();
  if (n_rows == 0 || k == 0) throw InputError("synthetic_glm: need N >= 1 and K >= 1");
  rng::DeviateBuffer xs(rng::DeviateKind::StdNormal, seed, rng::derive_stream(seed, 1));
  rng::DeviateBuffer us(rng::DeviateKind::Uniform01, seed, rng::derive_stream(seed, 3));
  std::vector<double> x(n_rows * k), y(n_rows);
  xs.take(x);
  for (std::size_t n = 0; n < n_rows; ++n) {
    double t = 0.0;
    for (std::size_t j = 0; j < k; ++j) t += x[n * k + j] * beta_true[j];
    const double p = 1.0 / (1.0 + std::exp(-t));
    y[n] = us.next() < p ? 1.0 : 0.0;
  }
  return SyntheticGlm{DesignMatrix(n_rows, k, std::move(x), std::move(y)),
                      std::vector<double>(beta_true.begin(), beta_true.end())};
}

SyntheticGlm synthetic_glm(std::size_t n_rows, std::size_t n_cols, std::uint64_t seed) {
  if (n_cols == 0) throw InputError("synthetic_glm: need K >= 1");
  rng::DeviateBuffer bs(rng::DeviateKind::Uniform01, seed, rng::derive_stream(seed, 2), 64);
  std::vector<double> beta(n_cols);
  for (double& b : beta) b = 2.0 * bs.next() - 1.0;
  return synthetic_glm(n_rows, beta, seed);
}

}  // namespace mcmcperf::glm
