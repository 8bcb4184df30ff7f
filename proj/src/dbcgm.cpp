#include "ttdeblur/dbcgm.hpp"

#include "ttdeblur/error.hpp"

namespace ttdeblur::dbcgm {

CollocatedWindow gather_window(std::span<const Frame> video, const rsdm::PatchSelection& selection) {
  const int t = selection.frame;
  if (t - kCenter < 0 || t + kCenter >= static_cast<int>(video.size())) {
    throw InvalidInput("gather_window: frames " + std::to_string(t - kCenter) + ".." + std::to_string(t + kCenter) +
                       " exceed video " + selection.video_id + " of length " + std::to_string(video.size()));
  }
  CollocatedWindow out;
  out.video_id = selection.video_id;
  out.center_frame = t;
  out.window = selection.window;
  for (int k = 0; k < kWindowFrames; ++k) {
    out.patches[static_cast<std::size_t>(k)] = crop(video[static_cast<std::size_t>(t - kCenter + k)], selection.window);
  }
  return out;
}

std::array<FlowField, 4> window_flows(const CollocatedWindow& window, const FlowEstimator& flow) {
  std::array<FlowField, 4> flows;
  for (int k = 0; k < 4; ++k) {
    const int from = window.center_frame - kCenter + k;
    const FramePairId id{window.video_id, from, from + 1, window.window};
    flows[static_cast<std::size_t>(k)] =
        flow.estimate(window.patches[static_cast<std::size_t>(k)], window.patches[static_cast<std::size_t>(k + 1)], id);
  }
  return flows;
}

BlurConditionField generate_condition(const CollocatedWindow& window, const FlowEstimator& flow,
                                      const MagnitudeEstimator& magnitude, const ConditionOptions& options,
                                      ConditionTrace* trace) {
  const std::string where = window.video_id + " t" + std::to_string(window.center_frame);
  std::array<FlowField, 4> flows;
  try {
    flows = window_flows(window, flow);
  } catch (const std::exception& e) {
    throw StageError("condition flow", where + ": " + e.what());
  }
  TrajectoryMap traj = accumulate_test_trajectory(flows);
  OrientationField orient = orientation_field(traj, options.eps);

  std::array<BlurMagnitudeMap, kWindowFrames> mags;
  try {
    for (int k = 0; k < kWindowFrames; ++k) {
      mags[static_cast<std::size_t>(k)] = magnitude.estimate(window.patches[static_cast<std::size_t>(k)]);
    }
  } catch (const std::exception& e) {
    throw StageError("condition magnitude", where + ": " + e.what());
  }
  const std::array<BlurMagnitudeMap, 4> neighbors{mags[0], mags[1], mags[3], mags[4]};
  BlurMagnitudeMap adapted = adapt_magnitude(mags[kCenter], neighbors, options.neighbor_average);

  BlurConditionField cond = assemble_condition(orient, adapted);
  if (trace) *trace = ConditionTrace{std::move(traj), std::move(orient), std::move(mags), std::move(adapted)};
  return cond;
}

}  // namespace ttdeblur::dbcgm
