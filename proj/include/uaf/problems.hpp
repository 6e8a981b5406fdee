#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uaf/oracle.hpp"

namespace uaf {

struct SparseEntry {
  int index = 0;  // 1-based, as in the LIBSVM text format
  double value = 0.0;

  bool operator==(const SparseEntry&) const = default;
};

struct SparseRow {
  double label = 1.0;  // +1 or -1
  std::vector<SparseEntry> features;

  bool operator==(const SparseRow&) const = default;
};

/// Labelled sparse design matrix. Indices are strictly increasing within a row
/// and d is the largest index seen.
struct SparseDataset {
  int d = 0;
  std::vector<SparseRow> rows;

  std::size_t n() const { return rows.size(); }
  bool operator==(const SparseDataset&) const = default;
};

/// Reads "label idx:val idx:val ..." lines. Blank lines and '#' comments are
/// skipped. 0/1 labels are remapped to -1/+1 (a note is appended to warnings);
/// any other label set is rejected. Malformed lines throw ParseError.
SparseDataset parse_libsvm(std::istream& in, std::vector<std::string>* warnings = nullptr);
SparseDataset parse_libsvm(const std::string& text, std::vector<std::string>* warnings = nullptr);
SparseDataset load_libsvm(const std::string& path, std::vector<std::string>* warnings = nullptr);

/// Writes the dataset back in LIBSVM text form using shortest round-trip numbers.
void write_libsvm(std::ostream& out, const SparseDataset& data);
std::string to_libsvm(const SparseDataset& data);

/// Synthetic binary classification data: Gaussian features scaled to unit
/// expected row norm, labels drawn from a logistic model around a random
/// separator (so the data are not separable and the minimizer is finite).
SparseDataset make_synthetic_logistic(int n, int d, std::uint64_t seed);

/// Logistic regression f(x) = (1/n) sum_j log(1 + exp(-b_j a_j^T x)),
/// plus an optional ridge term (ridge/2)||x||^2.
class LogisticObjective final : public ObjectiveOracle {
 public:
  explicit LogisticObjective(std::shared_ptr<const SparseDataset> data, double ridge = 0.0);

  int dim() const override { return data_->d; }
  int smooth_order() const override { return 2; }
  double smooth_value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Vec hess_vec(const Vec& x, const Vec& v) const override;
  std::string fingerprint() const override { return fingerprint_; }

  const SparseDataset& data() const { return *data_; }
  double ridge() const { return ridge_; }

  /// a_j^T x for row j.
  double margin(std::size_t j, const Vec& x) const;
  /// Scalar c with grad f_j(x) = c * a_j, where f_j excludes the ridge term.
  double sample_gradient_scale(std::size_t j, const Vec& x) const;

 private:
  std::shared_ptr<const SparseDataset> data_;
  double ridge_;
  std::string fingerprint_;
};

/// Numerically stable log(1 + exp(t)).
double log1p_exp(double t);
/// 1 / (1 + exp(-t)) without overflow.
double sigmoid(double t);

/// f(x) = 1/2 x^T Q x - b^T x with Q symmetric positive semidefinite.
class QuadraticObjective final : public ObjectiveOracle {
 public:
  QuadraticObjective(Mat q, Vec b);

  int dim() const override { return static_cast<int>(b_.size()); }
  int smooth_order() const override { return 2; }
  double smooth_value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Vec hess_vec(const Vec& x, const Vec& v) const override;
  std::string fingerprint() const override { return fingerprint_; }

  const Mat& hessian() const { return q_; }
  /// Gradient Lipschitz constant lambda_max(Q), the p = 1 smoothness constant.
  double gradient_lipschitz() const { return lambda_max_; }
  double lambda_min() const { return lambda_min_; }
  /// Present when Q is positive definite.
  const std::optional<Vec>& minimizer() const { return minimizer_; }
  std::optional<double> min_value() const;

 private:
  Mat q_;
  Vec b_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
  std::optional<Vec> minimizer_;
  std::string fingerprint_;
};

/// Default Hoelder constant for quadratics under (p = 2, nu = 1). The third
/// derivative vanishes, so any positive value is valid.
inline constexpr double kQuadraticHessianHolderConstant = 1e-3;

std::unique_ptr<QuadraticObjective> make_quadratic(const Mat& q, const Vec& b);
std::unique_ptr<QuadraticObjective> make_diagonal_quadratic(const Vec& diagonal, const Vec& b);

/// g(x) = 1/2 ||Ax - b||^2, l(x) = reg ||x||_1.
class L1LeastSquares final : public ObjectiveOracle {
 public:
  L1LeastSquares(Mat a, Vec b, double reg);

  int dim() const override { return static_cast<int>(a_.cols()); }
  int smooth_order() const override { return 2; }
  double smooth_value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Vec hess_vec(const Vec& x, const Vec& v) const override;
  const SimpleConvexTerm* composite_part() const override { return &l1_; }
  std::string fingerprint() const override { return fingerprint_; }

  double gradient_lipschitz() const { return lipschitz_; }

 private:
  Mat a_;
  Vec b_;
  L1Norm l1_;
  double lipschitz_ = 0.0;
  std::string fingerprint_;
};

std::unique_ptr<L1LeastSquares> make_l1_least_squares(const Mat& a, const Vec& b, double reg);

/// FNV-1a over raw bytes; used to key cached reference solutions.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 1469598103934665603ULL);

}  // namespace uaf
