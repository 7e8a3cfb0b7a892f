#pragma once

#include <optional>
#include <vector>

namespace xrel {

/// User quality requirement for a voter of `n_bits` inputs.
struct QualitySpec {
  int n_bits = 8;
  double q_dubv_percent = 0.0;          // quality degradation upper bound, percent
  std::optional<double> mted_override;  // takes precedence when present
};

/// Voter design record: tolerable error distance, relaxed LSB count and the
/// error-variance budget handed to the module approximation step.
struct SizingResult {
  int n_bits = 0;
  double mted = 0.0;
  int k = 0;
  double v_ub = 0.0;
};

/// Maximum tolerable error distance, (2^N - 1) * Q / 100 unless overridden.
/// Throws ValidationError for N outside [2, 64], Q outside [0, 100], or a
/// negative/non-finite override.
double compute_mted(const QualitySpec& spec);

/// Number of relaxed LSBs: floor(log2(mted)), 0 below one LSB, clamped to
/// n_bits - 1. A value within one ulp below a power of two snaps up to it.
int compute_k(double mted, int n_bits);

/// Error variance budget N/(N-1) * (2^k - 1)^2. Throws for k outside [0, N-1].
double variance_upper_bound(int n_bits, int k);

/// Sizes the voter for one quality spec.
SizingResult size_voter(const QualitySpec& spec);

/// One SizingResult per entry of `q_list`, in order. Validation failures are
/// rethrown as ValidationError naming the row index.
std::vector<SizingResult> size_table(int n_bits, const std::vector<double>& q_list);

/// The quality bounds swept for 16-bit voters in the reference evaluation.
const std::vector<double>& reference_q_list();

}  // namespace xrel
