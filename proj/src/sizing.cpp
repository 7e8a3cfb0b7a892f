#include "xrel/sizing.hpp"

#include <cmath>
#include <string>

#include <fmt/core.h>

#include "xrel/errors.hpp"

namespace xrel {

namespace {

void check_bits(int n_bits) {
  if (n_bits < 2 || n_bits > 64)
    throw ValidationError(fmt::format("n_bits must be in [2, 64], got {}", n_bits));
}

}  // namespace

double compute_mted(const QualitySpec& spec) {
  check_bits(spec.n_bits);
  if (spec.mted_override) {
    const double m = *spec.mted_override;
    if (!std::isfinite(m) || m < 0.0)
      throw ValidationError(fmt::format("mted override must be finite and >= 0, got {}", m));
    return m;
  }
  const double q = spec.q_dubv_percent;
  if (!(q >= 0.0 && q <= 100.0))
    throw ValidationError(fmt::format("q_dubv_percent must be in [0, 100], got {}", q));
  return (std::ldexp(1.0, spec.n_bits) - 1.0) * q / 100.0;
}

int compute_k(double mted, int n_bits) {
  check_bits(n_bits);
  if (std::isnan(mted)) throw ValidationError("mted is NaN");
  if (mted < 1.0) return 0;
  if (std::isinf(mted)) return n_bits - 1;
  // ilogb is exact for normal doubles: it is floor(log2(mted)).
  int k = std::ilogb(mted);
  if (std::nextafter(mted, INFINITY) == std::ldexp(1.0, k + 1)) ++k;
  return k > n_bits - 1 ? n_bits - 1 : k;
}

double variance_upper_bound(int n_bits, int k) {
  check_bits(n_bits);
  if (k < 0 || k > n_bits - 1)
    throw ValidationError(fmt::format("k must be in [0, {}], got {}", n_bits - 1, k));
  const double step = std::ldexp(1.0, k) - 1.0;
  return static_cast<double>(n_bits) / static_cast<double>(n_bits - 1) * step * step;
}

SizingResult size_voter(const QualitySpec& spec) {
  SizingResult r;
  r.n_bits = spec.n_bits;
  r.mted = compute_mted(spec);
  r.k = compute_k(r.mted, spec.n_bits);
  r.v_ub = variance_upper_bound(spec.n_bits, r.k);
  return r;
}

std::vector<SizingResult> size_table(int n_bits, const std::vector<double>& q_list) {
  std::vector<SizingResult> rows;
  rows.reserve(q_list.size());
  for (std::size_t i = 0; i < q_list.size(); ++i) {
    try {
      rows.push_back(size_voter(QualitySpec{n_bits, q_list[i], std::nullopt}));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("row {}: {}", i, e.what()));
    }
  }
  return rows;
}

const std::vector<double>& reference_q_list() {
  static const std::vector<double> q = {0.006, 0.012, 0.024, 0.048, 0.097, 0.195,
                                        0.390, 0.781, 1.562, 3.125, 6.250, 12.500};
  return q;
}

}  // namespace xrel
