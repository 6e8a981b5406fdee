#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace uaf {

enum class CheckOutcome { holds, violated, inapplicable };

const char* to_string(CheckOutcome outcome);

/// b[0] = 0 and b[k] > 0 for k >= 1.
struct SequenceCase {
  std::vector<double> b;
  double rho = 1.0;
  double C = 1.0;
  double delta = 1.0;
};

/// (b_k - b_{k-1})^rho >= C b_k^{rho-1} for all k  =>  b_k >= C (k/rho)^rho.
CheckOutcome check_seq_lemma_1(const SequenceCase& c);

/// sum_{i<=k} (b_i^{rho-1} / (b_i - b_{i-1})^rho)^delta <= C for all k
///   =>  b_k >= C^{-1/delta} (k/rho)^{rho + 1/delta}.
CheckOutcome check_seq_lemma_2(const SequenceCase& c);

/// |s t| <= (sigma/q) t^q + ((q-1)/q) sigma^{-1/(q-1)} s^{q/(q-1)} for s, t >= 0, q >= 2, sigma > 0.
bool check_young_type(double s, double t, double q, double sigma);

/// B_k^upsilon >= c sum_{i<=k} B_i for all k  =>  B_k >= ((upsilon-1)/upsilon c k)^{1/(upsilon-1)}.
/// B holds B_1, B_2, ... (no leading zero).
CheckOutcome check_bjl(const std::vector<double>& B, double c, double upsilon);

/// Random cases that satisfy the corresponding hypothesis by construction: each
/// term is the smallest admissible value times a slack factor >= 1.
SequenceCase make_lemma_1_case(std::mt19937_64& rng, int length);
SequenceCase make_lemma_2_case(std::mt19937_64& rng, int length);

struct BjlCase {
  std::vector<double> B;
  double c = 1.0;
  double upsilon = 2.0;
};
BjlCase make_bjl_case(std::mt19937_64& rng, int length);

}  // namespace uaf
