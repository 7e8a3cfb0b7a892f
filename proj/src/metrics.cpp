#include "xrel/metrics.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "xrel/errors.hpp"

namespace xrel {

std::uint64_t error_distance(std::int64_t o, std::int64_t o_approx) {
  return o >= o_approx ? static_cast<std::uint64_t>(o) - static_cast<std::uint64_t>(o_approx)
                       : static_cast<std::uint64_t>(o_approx) - static_cast<std::uint64_t>(o);
}

namespace {

void require_nonempty(const SampleSet& s) {
  if (s.pairs.empty()) throw ValidationError("sample set is empty");
}

long double signed_diff(const SamplePair& p) {
  return static_cast<long double>(p.exact) - static_cast<long double>(p.approx);
}

void require_same_shape(const Image& a, const Image& b) {
  validate(a);
  validate(b);
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw ValidationError(fmt::format("image shapes differ: {}x{}x{} vs {}x{}x{}", a.width, a.height,
                                      a.channels, b.width, b.height, b.channels));
}

}  // namespace

AggregateMetrics aggregate_metrics(const SampleSet& s) {
  require_nonempty(s);
  AggregateMetrics m;
  const std::size_t t = s.pairs.size();
  m.samples = t;
  std::size_t wrong = 0;
  long double ed_sum = 0.0L, red_sum = 0.0L, d_sum = 0.0L;
  std::size_t red_count = 0;
  for (const SamplePair& p : s.pairs) {
    const std::uint64_t ed = error_distance(p.exact, p.approx);
    if (ed != 0) ++wrong;
    ed_sum += static_cast<long double>(ed);
    d_sum += signed_diff(p);
    if (p.exact == 0) {
      ++m.mred_skipped;
    } else {
      red_sum += static_cast<long double>(ed) / std::fabs(static_cast<long double>(p.exact));
      ++red_count;
    }
  }
  m.er = static_cast<double>(wrong) / static_cast<double>(t);
  m.mean_ed = static_cast<double>(ed_sum / static_cast<long double>(t));
  m.mred = red_count ? static_cast<double>(red_sum / static_cast<long double>(red_count))
                     : std::numeric_limits<double>::quiet_NaN();
  if (t > 1) {
    const long double mean = d_sum / static_cast<long double>(t);
    long double ss = 0.0L;
    for (const SamplePair& p : s.pairs) {
      const long double c = signed_diff(p) - mean;
      ss += c * c;
    }
    m.variance = static_cast<double>(ss / static_cast<long double>(t - 1));
  }
  return m;
}

double mse(const SampleSet& s) {
  require_nonempty(s);
  long double sum = 0.0L;
  for (const SamplePair& p : s.pairs) {
    const long double d = signed_diff(p);
    sum += d * d;
  }
  return static_cast<double>(sum / static_cast<long double>(s.pairs.size()));
}

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b);
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const int d = int{a.data[i]} - int{b.data[i]};
    sum += static_cast<std::uint64_t>(d * d);
  }
  return static_cast<double>(sum) / static_cast<double>(a.data.size());
}

double psnr_from_mse(double mse_value, double max_value) {
  if (mse_value <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_value * max_value / mse_value);
}

double psnr(const SampleSet& s) {
  if (s.width < 1 || s.width > 64) throw ValidationError(fmt::format("width {} out of range", s.width));
  return psnr_from_mse(mse(s), std::ldexp(1.0, s.width) - 1.0);
}

double psnr(const Image& a, const Image& b) { return psnr_from_mse(mse(a, b), 255.0); }

double mssim(const Image& x, const Image& y) {
  require_same_shape(x, y);
  constexpr int w = kSsimWindow;
  if (x.width < w || x.height < w)
    throw ValidationError(fmt::format("image {}x{} is smaller than the {}x{} window", x.width, x.height, w, w));
  constexpr double c1 = (0.01 * 255) * (0.01 * 255);
  constexpr double c2 = (0.03 * 255) * (0.03 * 255);
  constexpr double n = w * w;

  const int W = x.width, H = x.height;
  const std::size_t stride = static_cast<std::size_t>(W) + 1;
  // Integral images of x, y, x^2, y^2, xy.
  std::vector<std::int64_t> sx(stride * (H + 1)), sy(sx.size()), sxx(sx.size()), syy(sx.size()), sxy(sx.size());
  auto at = [stride](std::vector<std::int64_t>& v, int r, int c) -> std::int64_t& {
    return v[static_cast<std::size_t>(r) * stride + c];
  };
  auto box = [&](std::vector<std::int64_t>& v, int r, int c) {
    return at(v, r + w, c + w) - at(v, r, c + w) - at(v, r + w, c) + at(v, r, c);
  };

  long double total = 0.0L;
  for (int ch = 0; ch < x.channels; ++ch) {
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c) {
        const std::int64_t a = x.at(c, r, ch), b = y.at(c, r, ch);
        at(sx, r + 1, c + 1) = a + at(sx, r, c + 1) + at(sx, r + 1, c) - at(sx, r, c);
        at(sy, r + 1, c + 1) = b + at(sy, r, c + 1) + at(sy, r + 1, c) - at(sy, r, c);
        at(sxx, r + 1, c + 1) = a * a + at(sxx, r, c + 1) + at(sxx, r + 1, c) - at(sxx, r, c);
        at(syy, r + 1, c + 1) = b * b + at(syy, r, c + 1) + at(syy, r + 1, c) - at(syy, r, c);
        at(sxy, r + 1, c + 1) = a * b + at(sxy, r, c + 1) + at(sxy, r + 1, c) - at(sxy, r, c);
      }
    for (int r = 0; r + w <= H; ++r)
      for (int c = 0; c + w <= W; ++c) {
        const std::int64_t Sx = box(sx, r, c), Sy = box(sy, r, c);
        const double mx = Sx / n, my = Sy / n;
        // n^2 * (co)variance computed exactly in integers.
        const double vx = static_cast<double>(w * w * box(sxx, r, c) - Sx * Sx) / (n * n);
        const double vy = static_cast<double>(w * w * box(syy, r, c) - Sy * Sy) / (n * n);
        const double cxy = static_cast<double>(w * w * box(sxy, r, c) - Sx * Sy) / (n * n);
        total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      }
  }
  const double windows = static_cast<double>(W - w + 1) * (H - w + 1) * x.channels;
  return static_cast<double>(total / windows);
}

double mse_ratio_from_mse(double mse_xrel, double mse_typical) {
  if (mse_typical == 0.0) return mse_xrel == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return mse_xrel / mse_typical;
}

double mse_ratio(const SampleSet& xrel, const SampleSet& typical) {
  if (xrel.pairs.size() != typical.pairs.size())
    throw ValidationError(fmt::format("sample sets differ in length: {} vs {}", xrel.pairs.size(),
                                      typical.pairs.size()));
  for (std::size_t i = 0; i < xrel.pairs.size(); ++i)
    if (xrel.pairs[i].exact != typical.pairs[i].exact)
      throw ValidationError(fmt::format("exact references differ at sample {}", i));
  return mse_ratio_from_mse(mse(xrel), mse(typical));
}

}  // namespace xrel
