#pragma once

// Domain-adaptive blur condition generation for one pseudo-sharp patch:
// five collocated crops -> flow trajectory -> orientation, per-patch
// magnitudes -> magnitude adaptation -> condition field.

#include <array>
#include <span>

#include "ttdeblur/backends.hpp"
#include "ttdeblur/fields.hpp"
#include "ttdeblur/rsdm.hpp"

namespace ttdeblur::dbcgm {

inline constexpr int kWindowFrames = 5;
inline constexpr int kCenter = 2;

/// Anything that maps a frame to a per-pixel blur magnitude map
/// (the trained BME, or an analytic oracle in tests).
class MagnitudeEstimator {
 public:
  virtual ~MagnitudeEstimator() = default;
  virtual BlurMagnitudeMap estimate(const Frame& frame) const = 0;
  virtual bool concurrent_safe() const { return true; }
};

struct CollocatedWindow {
  std::string video_id;
  int center_frame = 0;
  Window window;
  std::array<Frame, kWindowFrames> patches;  ///< frames t-2 .. t+2
};

CollocatedWindow gather_window(std::span<const Frame> video, const rsdm::PatchSelection& selection);

struct ConditionOptions {
  float eps = kDefaultOrientationEps;
  NeighborAverage neighbor_average = NeighborAverage::elementwise;
};

/// Intermediate products, kept for inspection and tests.
struct ConditionTrace {
  TrajectoryMap trajectory;
  OrientationField orientation;
  std::array<BlurMagnitudeMap, kWindowFrames> magnitudes;
  BlurMagnitudeMap adapted;
};

BlurConditionField generate_condition(const CollocatedWindow& window, const FlowEstimator& flow,
                                      const MagnitudeEstimator& magnitude, const ConditionOptions& options = {},
                                      ConditionTrace* trace = nullptr);

/// The four consecutive patch flows f(p_n, p_{n+1}), n = t-2 .. t+1.
std::array<FlowField, 4> window_flows(const CollocatedWindow& window, const FlowEstimator& flow);

}  // namespace ttdeblur::dbcgm
