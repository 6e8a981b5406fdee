#include "uaf/problems.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

namespace uaf {

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::uint64_t hash_matrix(const Mat& m, std::uint64_t h) {
  const std::array<Eigen::Index, 2> shape{m.rows(), m.cols()};
  h = fnv1a(shape.data(), sizeof(shape), h);
  return fnv1a(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
}

std::uint64_t hash_vector(const Vec& v, std::uint64_t h) {
  const Eigen::Index n = v.size();
  h = fnv1a(&n, sizeof(n), h);
  return fnv1a(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()), h);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view token, std::size_t line, const char* what) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw ParseError(line, std::string("non-numeric ") + what + " '" + std::string(token) + "'");
  }
  return value;
}

int parse_index(std::string_view token, std::size_t line) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "non-numeric index '" + std::string(token) + "'");
  }
  if (value < 1) throw ParseError(line, "index must be >= 1");
  return value;
}

void append_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

}  // namespace

SparseDataset parse_libsvm(std::istream& in, std::vector<std::string>* warnings) {
  SparseDataset data;
  std::vector<std::size_t> row_lines;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    SparseRow row;
    std::size_t pos = 0;
    bool first = true;
    while (pos < line.size()) {
      const auto end = std::min(line.find_first_of(" \t", pos), line.size());
      const std::string_view token = line.substr(pos, end - pos);
      pos = line.find_first_not_of(" \t", end);
      if (pos == std::string_view::npos) pos = line.size();
      if (token.empty()) continue;

      if (first) {
        row.label = parse_double(token, line_no, "label");
        first = false;
        continue;
      }
      const auto colon = token.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "missing colon in feature '" + std::string(token) + "'");
      }
      const int index = parse_index(token.substr(0, colon), line_no);
      const double value = parse_double(token.substr(colon + 1), line_no, "value");
      if (!row.features.empty() && index <= row.features.back().index) {
        throw ParseError(line_no, "non-increasing index");
      }
      row.features.push_back({index, value});
      data.d = std::max(data.d, index);
    }
    data.rows.push_back(std::move(row));
    row_lines.push_back(line_no);
  }

  std::set<double> labels;
  for (const auto& row : data.rows) labels.insert(row.label);
  const bool signed_labels = std::all_of(labels.begin(), labels.end(),
                                         [](double l) { return l == 1.0 || l == -1.0; });
  const bool binary_labels = std::all_of(labels.begin(), labels.end(),
                                         [](double l) { return l == 0.0 || l == 1.0; });
  if (!signed_labels) {
    if (!binary_labels) {
      for (std::size_t j = 0; j < data.rows.size(); ++j) {
        const double l = data.rows[j].label;
        if (l != 1.0 && l != -1.0 && l != 0.0) {
          throw ParseError(row_lines[j], "label must be +1/-1 (or 0/1)");
        }
      }
      throw ParseError(row_lines.empty() ? 0 : row_lines.front(), "labels mix 0/1 and -1/+1 encodings");
    }
    for (auto& row : data.rows) row.label = row.label == 0.0 ? -1.0 : 1.0;
    if (warnings) warnings->push_back("0/1 labels remapped to -1/+1");
  }
  return data;
}

SparseDataset parse_libsvm(const std::string& text, std::vector<std::string>* warnings) {
  std::istringstream in(text);
  return parse_libsvm(in, warnings);
}

SparseDataset load_libsvm(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::invalid_argument, "cannot open dataset '" + path + "'");
  return parse_libsvm(in, warnings);
}

void write_libsvm(std::ostream& out, const SparseDataset& data) { out << to_libsvm(data); }

std::string to_libsvm(const SparseDataset& data) {
  std::string out;
  for (const auto& row : data.rows) {
    out += row.label > 0 ? "1" : "-1";
    for (const auto& e : row.features) {
      out += ' ';
      out += std::to_string(e.index);
      out += ':';
      append_number(out, e.value);
    }
    out += '\n';
  }
  return out;
}

SparseDataset make_synthetic_logistic(int n, int d, std::uint64_t seed) {
  require(n > 0 && d > 0, Errc::invalid_argument, "synthetic data needs n, d > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Vec separator(d);
  for (int i = 0; i < d; ++i) separator[i] = normal(rng);
  separator *= 3.0 / separator.norm();

  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  SparseDataset data;
  data.d = d;
  data.rows.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    SparseRow row;
    row.features.reserve(static_cast<std::size_t>(d));
    double margin = 0.0;
    for (int i = 0; i < d; ++i) {
      const double v = scale * normal(rng);
      row.features.push_back({i + 1, v});
      margin += v * separator[i];
    }
    row.label = uniform(rng) < sigmoid(margin) ? 1.0 : -1.0;
    data.rows.push_back(std::move(row));
  }
  return data;
}

double log1p_exp(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

LogisticObjective::LogisticObjective(std::shared_ptr<const SparseDataset> data, double ridge)
    : data_(std::move(data)), ridge_(ridge) {
  require(data_ != nullptr && data_->n() > 0, Errc::invalid_argument, "logistic objective needs data");
  require(ridge_ >= 0.0, Errc::invalid_argument, "ridge must be nonnegative");
  const std::string text = to_libsvm(*data_);
  std::uint64_t h = fnv1a(text.data(), text.size());
  h = fnv1a(&ridge_, sizeof(ridge_), h);
  h = fnv1a(&data_->d, sizeof(data_->d), h);
  fingerprint_ = "logistic-" + hex64(h);
}

double LogisticObjective::margin(std::size_t j, const Vec& x) const {
  double m = 0.0;
  for (const auto& e : data_->rows[j].features) m += e.value * x[e.index - 1];
  return m;
}

double LogisticObjective::sample_gradient_scale(std::size_t j, const Vec& x) const {
  const double b = data_->rows[j].label;
  return -b * sigmoid(-b * margin(j, x));
}

double LogisticObjective::smooth_value(const Vec& x) const {
  require(x.size() == dim(), Errc::dimension_mismatch, "logistic: point has wrong dimension");
  double sum = 0.0;
  for (std::size_t j = 0; j < data_->n(); ++j) {
    sum += log1p_exp(-data_->rows[j].label * margin(j, x));
  }
  return sum / static_cast<double>(data_->n()) + 0.5 * ridge_ * x.squaredNorm();
}

Vec LogisticObjective::gradient(const Vec& x) const {
  require(x.size() == dim(), Errc::dimension_mismatch, "logistic: point has wrong dimension");
  Vec g = Vec::Zero(dim());
  for (std::size_t j = 0; j < data_->n(); ++j) {
    const double c = sample_gradient_scale(j, x);
    for (const auto& e : data_->rows[j].features) g[e.index - 1] += c * e.value;
  }
  g /= static_cast<double>(data_->n());
  if (ridge_ > 0.0) g += ridge_ * x;
  return g;
}

Vec LogisticObjective::hess_vec(const Vec& x, const Vec& v) const {
  require(x.size() == dim() && v.size() == dim(), Errc::dimension_mismatch,
          "logistic: point or direction has wrong dimension");
  Vec out = Vec::Zero(dim());
  for (std::size_t j = 0; j < data_->n(); ++j) {
    const double s = sigmoid(data_->rows[j].label * margin(j, x));
    const double w = s * (1.0 - s);
    double av = 0.0;
    for (const auto& e : data_->rows[j].features) av += e.value * v[e.index - 1];
    const double c = w * av;
    for (const auto& e : data_->rows[j].features) out[e.index - 1] += c * e.value;
  }
  out /= static_cast<double>(data_->n());
  if (ridge_ > 0.0) out += ridge_ * v;
  return out;
}

QuadraticObjective::QuadraticObjective(Mat q, Vec b) : q_(std::move(q)), b_(std::move(b)) {
  require(q_.rows() == q_.cols() && q_.rows() == b_.size() && b_.size() > 0, Errc::dimension_mismatch,
          "quadratic: Q must be square and match b");
  require((q_ - q_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, q_.cwiseAbs().maxCoeff()),
          Errc::invalid_argument, "quadratic: Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(q_);
  lambda_min_ = eig.eigenvalues().minCoeff();
  lambda_max_ = eig.eigenvalues().maxCoeff();
  require(lambda_min_ >= -1e-12 * std::max(1.0, std::abs(lambda_max_)), Errc::invalid_argument,
          "quadratic: Q is indefinite");
  if (lambda_min_ > 1e-14 * std::max(1.0, lambda_max_)) minimizer_ = q_.ldlt().solve(b_);
  fingerprint_ = "quadratic-" + hex64(hash_vector(b_, hash_matrix(q_, fnv1a("q", 1))));
}

double QuadraticObjective::smooth_value(const Vec& x) const {
  require(x.size() == dim(), Errc::dimension_mismatch, "quadratic: point has wrong dimension");
  return 0.5 * x.dot(q_ * x) - b_.dot(x);
}

Vec QuadraticObjective::gradient(const Vec& x) const {
  require(x.size() == dim(), Errc::dimension_mismatch, "quadratic: point has wrong dimension");
  return q_ * x - b_;
}

Vec QuadraticObjective::hess_vec(const Vec& /*x*/, const Vec& v) const {
  require(v.size() == dim(), Errc::dimension_mismatch, "quadratic: direction has wrong dimension");
  return q_ * v;
}

std::optional<double> QuadraticObjective::min_value() const {
  if (!minimizer_) return std::nullopt;
  return -0.5 * b_.dot(*minimizer_);
}

std::unique_ptr<QuadraticObjective> make_quadratic(const Mat& q, const Vec& b) {
  return std::make_unique<QuadraticObjective>(q, b);
}

std::unique_ptr<QuadraticObjective> make_diagonal_quadratic(const Vec& diagonal, const Vec& b) {
  return std::make_unique<QuadraticObjective>(Mat(diagonal.asDiagonal()), b);
}

L1LeastSquares::L1LeastSquares(Mat a, Vec b, double reg) : a_(std::move(a)), b_(std::move(b)), l1_(reg) {
  require(a_.rows() == b_.size() && a_.cols() > 0, Errc::dimension_mismatch,
          "least squares: A and b disagree");
  Eigen::SelfAdjointEigenSolver<Mat> eig(a_.transpose() * a_, Eigen::EigenvaluesOnly);
  lipschitz_ = eig.eigenvalues().maxCoeff();
  std::uint64_t h = hash_vector(b_, hash_matrix(a_, fnv1a("l1ls", 4)));
  h = fnv1a(&reg, sizeof(reg), h);
  fingerprint_ = "l1ls-" + hex64(h);
}

double L1LeastSquares::smooth_value(const Vec& x) const {
  require(x.size() == dim(), Errc::dimension_mismatch, "least squares: point has wrong dimension");
  return 0.5 * (a_ * x - b_).squaredNorm();
}

Vec L1LeastSquares::gradient(const Vec& x) const {
  require(x.size() == dim(), Errc::dimension_mismatch, "least squares: point has wrong dimension");
  return a_.transpose() * (a_ * x - b_);
}

Vec L1LeastSquares::hess_vec(const Vec& /*x*/, const Vec& v) const {
  return a_.transpose() * (a_ * v);
}

std::unique_ptr<L1LeastSquares> make_l1_least_squares(const Mat& a, const Vec& b, double reg) {
  return std::make_unique<L1LeastSquares>(a, b, reg);
}

}  // namespace uaf
