#pragma once

#include <cstdint>
#include <vector>

#include "xrel/image.hpp"

namespace xrel {

struct SamplePair {
  std::int64_t exact = 0;
  std::int64_t approx = 0;
};

/// Exact/approximate output pairs of one experiment. Values are already in
/// their numeric interpretation (signed or unsigned) and fit in `width` bits.
struct SampleSet {
  std::vector<SamplePair> pairs;
  int width = 8;
};

struct AggregateMetrics {
  double er = 0.0;
  double mean_ed = 0.0;
  double mred = 0.0;      // NaN when every exact value is zero
  double variance = 0.0;  // centered, T - 1 denominator; 0 for a single pair
  std::size_t mred_skipped = 0;
  std::size_t samples = 0;
};

/// |o - o_approx|.
std::uint64_t error_distance(std::int64_t o, std::int64_t o_approx);

/// Throws ValidationError on an empty set.
AggregateMetrics aggregate_metrics(const SampleSet& s);

/// Mean squared error. Throws ValidationError on an empty set.
double mse(const SampleSet& s);
double mse(const Image& a, const Image& b);

/// 10 log10(max^2 / mse); +inf when mse is 0.
double psnr_from_mse(double mse_value, double max_value);
/// MAX = 2^width - 1.
double psnr(const SampleSet& s);
/// MAX = 255. Throws ValidationError on a shape mismatch.
double psnr(const Image& a, const Image& b);

/// Side of the square SSIM window.
inline constexpr int kSsimWindow = 8;

/// Mean SSIM over every 8x8 window position (stride 1) of every channel,
/// population statistics, C1 = (0.01*255)^2, C2 = (0.03*255)^2. Throws
/// ValidationError on mismatched shapes or images smaller than the window.
double mssim(const Image& x, const Image& y);

/// mse_xrel / mse_typical; +inf when only the typical MSE is zero, 1 when
/// both are zero.
double mse_ratio_from_mse(double mse_xrel, double mse_typical);
/// Throws ValidationError on length or exact-reference mismatch.
double mse_ratio(const SampleSet& xrel, const SampleSet& typical);

}  // namespace xrel
