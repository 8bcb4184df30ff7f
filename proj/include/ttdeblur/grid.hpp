#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ttdeblur {

struct Shape {
  int height = 0;
  int width = 0;

  std::size_t area() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Axis-aligned crop rectangle in pixel coordinates.
struct Window {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;

  bool inside(Shape s) const {
    return top >= 0 && left >= 0 && height > 0 && width > 0 && top + height <= s.height && left + width <= s.width;
  }
  friend bool operator==(const Window&, const Window&) = default;
};

/// Single-channel float32 grid, row-major, origin top-left.
class Plane {
 public:
  Plane() = default;
  Plane(int height, int width, float fill = 0.0f);
  explicit Plane(Shape shape, float fill = 0.0f) : Plane(shape.height, shape.width, fill) {}
  Plane(int height, int width, std::vector<float> values);

  int height() const { return height_; }
  int width() const { return width_; }
  Shape shape() const { return {height_, width_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& operator()(int y, int x) { return data_[index(y, x)]; }
  float operator()(int y, int x) const { return data_[index(y, x)]; }

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  float max() const;
  float min() const;
  double mean() const;

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// H x W x C image stored channel-planar (C planes of H x W). C is 1 or 3.
/// Intensities are nominally in [0, 1].
class Frame {
 public:
  Frame() = default;
  Frame(int channels, int height, int width, float fill = 0.0f);
  Frame(int channels, Shape shape, float fill = 0.0f) : Frame(channels, shape.height, shape.width, fill) {}
  static Frame from_planes(const std::vector<Plane>& planes);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  Shape shape() const { return {height_, width_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data_[index(c, y, x)]; }

  std::span<float> channel(int c);
  std::span<const float> channel(int c) const;
  Plane plane(int c) const;

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  void clamp01();
  /// Channel-mean luminance proxy.
  Plane gray() const;

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * static_cast<std::size_t>(height_) + static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// Exact pixel copy of `window`; throws InvalidInput if it leaves the frame.
Frame crop(const Frame& frame, const Window& window);
Plane crop(const Plane& plane, const Window& window);
/// Writes `patch` back into `frame` at `window`.
void embed(Frame& frame, const Frame& patch, const Window& window);

/// Throws InvalidInput naming `what` if the shapes differ.
void require_same_shape(Shape a, Shape b, const char* what);

/// Bilinear sample with coordinates clamped to the border.
float sample_bilinear_clamped(std::span<const float> plane, int height, int width, double y, double x);

}  // namespace ttdeblur
