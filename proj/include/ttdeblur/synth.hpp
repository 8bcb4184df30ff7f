#pragma once

// Exposure-accumulation blur synthesis, BME training-set construction, the
// deterministic conditioned-blur renderer and a toy sequence factory.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ttdeblur/backends.hpp"
#include "ttdeblur/fields.hpp"
#include "ttdeblur/grid.hpp"

namespace ttdeblur::synth {

struct CrfSpec {
  enum class Kind { identity, gamma };
  Kind kind = Kind::identity;
  double gamma_value = 2.2;

  float apply(float linear) const;
  std::string name() const;
  static CrfSpec parse(const std::string& kind, double gamma_value = 2.2);
};

inline constexpr int kDefaultExposureFrames = 7;
inline constexpr int kDefaultRenderSteps = 15;

/// B = g(mean of frames). Requires an odd, nonzero frame count.
Frame synthesize_blurred_frame(std::span<const Frame> frames, const CrfSpec& crf = {});

/// Index of the center (ground-truth sharp) frame of an odd window, 0-based.
int center_index(int frame_count);

/// Symmetric line integral of `sharp` along z * tau * (x, y), sampled at
/// `steps` points with bilinear interpolation and border clamping.
Frame render_conditioned_blur(const Frame& sharp, const BlurConditionField& cond, Tau tau,
                              int steps = kDefaultRenderSteps);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct MovingObject {
  double top = 0.0;
  double left = 0.0;
  int size = 16;
  Vec2 velocity;  ///< pixels per frame
};

struct MotionSpec {
  int height = 64;
  int width = 64;
  int channels = 3;
  int frame_count = kDefaultExposureFrames;
  Vec2 background_velocity;
  /// Optional per-step background velocities (step n moves frame n to n+1);
  /// overrides background_velocity when non-empty. Needs frame_count - 1 entries.
  std::vector<Vec2> background_schedule;
  std::vector<MovingObject> objects;
  double texture_spacing = 6.0;
  std::uint64_t seed = 0;
};

struct ToySequence {
  std::vector<Frame> frames;
  /// forward_flows[n] = flow from frame n to n + 1 (frame_count - 1 entries).
  std::vector<FlowField> forward_flows;
  /// backward_flows[n] = flow from frame n to n - 1; entry 0 is the zero field.
  std::vector<FlowField> backward_flows;
};

/// Deterministic in `spec.seed`; the returned flows are the exact per-pixel
/// motion of whatever surface covers each pixel.
ToySequence generate_toy_sequence(const MotionSpec& spec);

/// Renders frames one at a time without materializing the sequence or flows.
void for_each_toy_frame(const MotionSpec& spec, const std::function<void(int, const Frame&)>& visit);

/// A randomized spec: background motion plus 0-3 moving squares.
MotionSpec random_motion_spec(std::uint64_t seed, int height, int width, int frame_count, double max_speed);

/// Adds every toy flow to `table` under `video`, keyed by frame indices.
void register_flows(InjectedFlowEstimator& table, const std::string& video, const ToySequence& seq);

struct SharpSequence {
  std::string id;
  std::vector<Frame> frames;
};

struct TrainingSample {
  std::string sequence_id;
  Frame blurred;
  Frame sharp;
  BlurMagnitudeMap magnitude_gt;
  Tau tau_used;
};

struct BmeDataset {
  std::vector<TrainingSample> samples;
  Tau tau;
  int exposure_frames = 0;
  CrfSpec crf;
};

/// One sample per sequence: exposure-blurred frame, center sharp frame and
/// the magnitude map normalized by the corpus-wide maximum trajectory norm.
BmeDataset build_bme_dataset(std::span<const SharpSequence> sequences, const FlowEstimator& flow,
                             const CrfSpec& crf = {});

/// The un-normalized trajectory for one sequence (flows requested from `flow`).
TrajectoryMap sequence_trajectory(const SharpSequence& seq, const FlowEstimator& flow);

/// Deterministic uniform [0, 1) from a splitmix64 stream; identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace ttdeblur::synth
