#pragma once

// Trajectory accumulation, blur magnitude/orientation fields, magnitude
// adaptation and blur-condition assembly. Pure functions over float32 grids;
// safe to call concurrently.

#include <span>
#include <vector>

#include "ttdeblur/grid.hpp"

namespace ttdeblur {

/// Per-pixel displacement between two frames, in pixels (+x right, +y down).
struct FlowField {
  Plane u;
  Plane v;

  FlowField() = default;
  FlowField(Plane u_, Plane v_);
  FlowField(Shape shape, float u_fill, float v_fill) : u(shape, u_fill), v(shape, v_fill) {}
  Shape shape() const { return u.shape(); }
  friend bool operator==(const FlowField&, const FlowField&) = default;
};

/// Accumulated per-pixel motion over an exposure or temporal window.
struct TrajectoryMap {
  Plane u;
  Plane v;

  TrajectoryMap() = default;
  TrajectoryMap(Plane u_, Plane v_);
  Shape shape() const { return u.shape(); }
  friend bool operator==(const TrajectoryMap&, const TrajectoryMap&) = default;
};

/// Normalized per-pixel blurriness, 0 <= m <= 1.
struct BlurMagnitudeMap {
  Plane m;

  Shape shape() const { return m.shape(); }
  friend bool operator==(const BlurMagnitudeMap&, const BlurMagnitudeMap&) = default;
};

/// Unit blur directions; (0, 0) marks pixels without a defined direction.
struct OrientationField {
  Plane ox;
  Plane oy;

  Shape shape() const { return ox.shape(); }
  friend bool operator==(const OrientationField&, const OrientationField&) = default;
};

/// Per-pixel (x, y, z): blur orientation (x, y) and magnitude z in [0, 1].
struct BlurConditionField {
  Plane x;
  Plane y;
  Plane z;

  BlurConditionField() = default;
  BlurConditionField(Plane x_, Plane y_, Plane z_);
  Shape shape() const { return x.shape(); }
  friend bool operator==(const BlurConditionField&, const BlurConditionField&) = default;
};

/// Corpus-wide normalization length tau (pixels), always > 0.
class Tau {
 public:
  explicit Tau(double value);
  double value() const { return value_; }
  friend bool operator==(const Tau&, const Tau&) = default;

 private:
  double value_;
};

inline constexpr float kDefaultOrientationEps = 1e-6f;

/// Central-difference exposure trajectory of a sharp sequence:
///   sum_n (forward[n] - backward[n]) / 2.
/// backward[0] refers to a frame before the sequence and is expected to be
/// the zero field.
TrajectoryMap accumulate_training_trajectory(std::span<const FlowField> forward_flows,
                                             std::span<const FlowField> backward_flows);

/// m = |F| / tau. Throws OutOfRange if any pixel norm exceeds tau.
BlurMagnitudeMap magnitude_ground_truth(const TrajectoryMap& traj, Tau tau);

/// Largest trajectory norm over all pixels (the per-image candidate for tau).
double max_trajectory_norm(const TrajectoryMap& traj);

/// Sum of the four consecutive flows of a 5-frame window t-2 .. t+2.
TrajectoryMap accumulate_test_trajectory(std::span<const FlowField> flows);

OrientationField orientation_field(const TrajectoryMap& traj, float eps = kDefaultOrientationEps);

enum class NeighborAverage {
  elementwise,  ///< per-pixel mean of the four neighbor maps
  scalar,       ///< one mean over all neighbor pixels, broadcast
};

/// Norm(center) * Avg(neighbors), with Norm dividing by the map maximum
/// (an all-zero map stays zero).
BlurMagnitudeMap adapt_magnitude(const BlurMagnitudeMap& center, std::span<const BlurMagnitudeMap> neighbors,
                                 NeighborAverage mode = NeighborAverage::elementwise);

BlurConditionField assemble_condition(const OrientationField& orient, const BlurMagnitudeMap& mag);

/// Throws InvalidInput if the condition violates its field invariants.
void validate_condition(const BlurConditionField& cond, float unit_tol = 1e-5f);

}  // namespace ttdeblur
