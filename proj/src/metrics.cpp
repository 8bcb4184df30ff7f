#include "ttdeblur/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "ttdeblur/error.hpp"

namespace ttdeblur::metrics {

namespace {

void require_aligned(const Frame& a, const Frame& b, const char* what) {
  require_same_shape(a.shape(), b.shape(), what);
  if (a.channels() != b.channels()) throw InvalidInput(std::string(what) + ": channel mismatch");
}

constexpr int kRadius = 5;
constexpr double kSigma = 1.5;

std::array<double, 2 * kRadius + 1> gaussian_taps() {
  std::array<double, 2 * kRadius + 1> taps{};
  double sum = 0.0;
  for (int i = -kRadius; i <= kRadius; ++i) {
    taps[i + kRadius] = std::exp(-(i * i) / (2.0 * kSigma * kSigma));
    sum += taps[i + kRadius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

/// Separable Gaussian filter keeping only fully-supported outputs.
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w) {
  static const auto taps = gaussian_taps();
  const int oh = h - 2 * kRadius;
  const int ow = w - 2 * kRadius;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k <= 2 * kRadius; ++k) acc += taps[k] * img[static_cast<std::size_t>(y) * w + x + k];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k <= 2 * kRadius; ++k) acc += taps[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

double ssim_channel(std::span<const float> a, std::span<const float> b, int h, int w) {
  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  const std::size_t n = a.size();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = a[i];
    y[i] = b[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, h, w);
  const auto my = filter_valid(y, h, w);
  const auto mxx = filter_valid(xx, h, w);
  const auto myy = filter_valid(yy, h, w);
  const auto mxy = filter_valid(xy, h, w);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = mxx[i] - mx[i] * mx[i];
    const double vy = myy[i] - my[i] * my[i];
    const double cov = mxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

}  // namespace

double mse(const Frame& a, const Frame& b) {
  require_aligned(a, b, "mse");
  auto av = a.values();
  auto bv = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = static_cast<double>(av[i]) - bv[i];
    acc += d * d;
  }
  return av.empty() ? 0.0 : acc / static_cast<double>(av.size());
}

double psnr(const Frame& a, const Frame& b) {
  const double e = mse(a, b);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / e);
}

double ssim(const Frame& a, const Frame& b) {
  require_aligned(a, b, "ssim");
  if (a.height() < 2 * kRadius + 1 || a.width() < 2 * kRadius + 1) {
    throw InvalidInput("ssim: frames must be at least 11x11");
  }
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) total += ssim_channel(a.channel(c), b.channel(c), a.height(), a.width());
  return total / a.channels();
}

}  // namespace ttdeblur::metrics
