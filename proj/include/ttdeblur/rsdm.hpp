#pragma once

// Relative sharpness detection: per-frame window scoring on magnitude maps,
// per-video top-r% frame selection, and patch cropping.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ttdeblur/fields.hpp"
#include "ttdeblur/grid.hpp"

namespace ttdeblur::rsdm {

inline constexpr int kPatchSize = 256;
inline constexpr int kDefaultStride = 32;
inline constexpr double kDefaultRatio = 20.0;
/// Frames need t-2 .. t+2 for condition generation.
inline constexpr int kTemporalRadius = 2;

struct WindowScore {
  double score = 0.0;  ///< mean magnitude inside `window`
  Window window;
};

/// Minimum window-mean magnitude over stride-aligned patch x patch windows
/// (plus the bottom/right flush positions). Ties go to the smallest
/// (top, left). Returns nullopt if the map is smaller than the patch.
std::optional<WindowScore> frame_sharpness_score(const BlurMagnitudeMap& mag, int patch = kPatchSize,
                                                 int stride = kDefaultStride);

enum class CropMode {
  window_search,        ///< argmin window from frame_sharpness_score
  connected_component,  ///< largest sub-threshold component, centered crop
};

struct SelectionOptions {
  double ratio = kDefaultRatio;  ///< r, percent of frames
  int patch = kPatchSize;
  int stride = kDefaultStride;
  /// Optional rank band (lo%, hi%) replacing the top-r% rule.
  std::optional<std::pair<double, double>> ratio_range;
  CropMode crop_mode = CropMode::window_search;
};

struct PatchSelection {
  std::string video_id;
  int frame = 0;
  Window window;
  double score = 0.0;
  double eta_implied = 0.0;
};

struct SelectionReport {
  std::vector<PatchSelection> selections;
  std::vector<int> ineligible_frames;
  std::vector<std::string> warnings;
  double eta_implied = 0.0;
};

/// Number of frames the top-r% rule keeps out of `total`: ceil(r/100 * total).
int selection_count(double ratio, int total);

SelectionReport select_pseudo_sharp(const std::string& video_id, std::span<const BlurMagnitudeMap> video_mags,
                                    const SelectionOptions& options = {});

/// Window of the largest 4-connected component of {m <= eta}, centered on its
/// centroid and clipped to the frame. nullopt when the mask is empty.
std::optional<Window> component_window(const BlurMagnitudeMap& mag, double eta, int patch = kPatchSize);

inline Frame crop_patch(const Frame& frame, const Window& window) { return crop(frame, window); }

/// Integer summed-area table over fixed-point magnitudes; window sums are exact.
class SummedAreaTable {
 public:
  explicit SummedAreaTable(const Plane& values);
  /// Mean over rows [top, top+h) and cols [left, left+w).
  double mean(int top, int left, int h, int w) const;
  std::int64_t sum_fixed(int top, int left, int h, int w) const;

  static constexpr double kScale = 4294967296.0;  // 2^32

 private:
  int height_;
  int width_;
  std::vector<std::int64_t> table_;  // (height+1) x (width+1)
};

}  // namespace ttdeblur::rsdm
