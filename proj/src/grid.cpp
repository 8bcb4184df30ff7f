#include "ttdeblur/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ttdeblur/error.hpp"

namespace ttdeblur {

std::string to_string(const Shape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width);
}

Plane::Plane(int height, int width, float fill) : height_(height), width_(width) {
  if (height < 0 || width < 0) throw InvalidInput("Plane: negative dimensions");
  data_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
}

Plane::Plane(int height, int width, std::vector<float> values)
    : height_(height), width_(width), data_(std::move(values)) {
  if (height < 0 || width < 0 ||
      data_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw InvalidInput("Plane: value count does not match " + std::to_string(height) + "x" + std::to_string(width));
  }
}

float Plane::max() const {
  return data_.empty() ? 0.0f : *std::max_element(data_.begin(), data_.end());
}

float Plane::min() const {
  return data_.empty() ? 0.0f : *std::min_element(data_.begin(), data_.end());
}

double Plane::mean() const {
  if (data_.empty()) return 0.0;
  double acc = 0.0;
  for (float v : data_) acc += v;
  return acc / static_cast<double>(data_.size());
}

Frame::Frame(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels != 1 && channels != 3) throw InvalidInput("Frame: channel count must be 1 or 3");
  if (height < 0 || width < 0) throw InvalidInput("Frame: negative dimensions");
  data_.assign(static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) * static_cast<std::size_t>(width),
               fill);
}

Frame Frame::from_planes(const std::vector<Plane>& planes) {
  if (planes.empty()) throw InvalidInput("Frame::from_planes: no planes");
  Frame f(static_cast<int>(planes.size()), planes.front().height(), planes.front().width());
  for (std::size_t c = 0; c < planes.size(); ++c) {
    require_same_shape(planes[c].shape(), f.shape(), "Frame::from_planes");
    std::copy(planes[c].values().begin(), planes[c].values().end(), f.channel(static_cast<int>(c)).begin());
  }
  return f;
}

std::span<float> Frame::channel(int c) {
  return std::span<float>(data_).subspan(static_cast<std::size_t>(c) * shape().area(), shape().area());
}

std::span<const float> Frame::channel(int c) const {
  return std::span<const float>(data_).subspan(static_cast<std::size_t>(c) * shape().area(), shape().area());
}

Plane Frame::plane(int c) const {
  auto ch = channel(c);
  return Plane(height_, width_, std::vector<float>(ch.begin(), ch.end()));
}

void Frame::clamp01() {
  for (float& v : data_) v = std::clamp(v, 0.0f, 1.0f);
}

Plane Frame::gray() const {
  Plane g(height_, width_);
  auto out = g.values();
  for (int c = 0; c < channels_; ++c) {
    auto ch = channel(c);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += ch[i];
  }
  const float inv = 1.0f / static_cast<float>(std::max(channels_, 1));
  for (float& v : out) v *= inv;
  return g;
}

namespace {

void require_inside(const Window& w, Shape s) {
  if (!w.inside(s)) {
    throw InvalidInput("window (" + std::to_string(w.top) + "," + std::to_string(w.left) + " " +
                       std::to_string(w.height) + "x" + std::to_string(w.width) + ") outside frame " + to_string(s));
  }
}

}  // namespace

Frame crop(const Frame& frame, const Window& window) {
  require_inside(window, frame.shape());
  Frame out(frame.channels(), window.height, window.width);
  for (int c = 0; c < frame.channels(); ++c) {
    for (int y = 0; y < window.height; ++y) {
      for (int x = 0; x < window.width; ++x) out.at(c, y, x) = frame.at(c, window.top + y, window.left + x);
    }
  }
  return out;
}

Plane crop(const Plane& plane, const Window& window) {
  require_inside(window, plane.shape());
  Plane out(window.height, window.width);
  for (int y = 0; y < window.height; ++y) {
    for (int x = 0; x < window.width; ++x) out(y, x) = plane(window.top + y, window.left + x);
  }
  return out;
}

void embed(Frame& frame, const Frame& patch, const Window& window) {
  require_inside(window, frame.shape());
  require_same_shape(patch.shape(), Shape{window.height, window.width}, "embed");
  if (patch.channels() != frame.channels()) throw InvalidInput("embed: channel count mismatch");
  for (int c = 0; c < frame.channels(); ++c) {
    for (int y = 0; y < window.height; ++y) {
      for (int x = 0; x < window.width; ++x) frame.at(c, window.top + y, window.left + x) = patch.at(c, y, x);
    }
  }
}

void require_same_shape(Shape a, Shape b, const char* what) {
  if (!(a == b)) {
    throw InvalidInput(std::string(what) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
  }
}

float sample_bilinear_clamped(std::span<const float> plane, int height, int width, double y, double x) {
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const int y1 = std::min(y0 + 1, height - 1);
  const int x1 = std::min(x0 + 1, width - 1);
  const double fy = y - y0;
  const double fx = x - x0;
  auto px = [&](int yy, int xx) {
    return static_cast<double>(plane[static_cast<std::size_t>(yy) * static_cast<std::size_t>(width) + xx]);
  };
  const double top = px(y0, x0) * (1.0 - fx) + px(y0, x1) * fx;
  const double bottom = px(y1, x0) * (1.0 - fx) + px(y1, x1) * fx;
  return static_cast<float>(top * (1.0 - fy) + bottom * fy);
}

}  // namespace ttdeblur
