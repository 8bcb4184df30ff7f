#pragma once

// Desk-scale synthetic corpus: sharp high-frame-rate sequences for BME
// training, plus blurred videos rendered by exposure accumulation under a
// global camera motion whose speed changes from frame to frame.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttdeblur/adapt.hpp"
#include "ttdeblur/backends.hpp"
#include "ttdeblur/synth.hpp"

namespace ttdeblur::synth {

struct BlurStyle {
  Vec2 direction{1.0, 0.0};  ///< camera motion direction (normalized on use)
  double speed_min = 0.5;    ///< pixels per sub-frame
  double speed_max = 2.5;
  /// Probability that a frame is exposed while the camera is nearly still.
  double still_probability = 0.0;
  double still_speed = 0.1;
  int objects = 0;  ///< moving squares; blurred-frame flows are only exact without them

  nlohmann::json to_json() const;
  static BlurStyle from_json(const nlohmann::json& j);
};

struct BlurredVideo {
  std::string id;
  std::vector<Frame> blurred;
  std::vector<Frame> sharp;        ///< center sub-frame of each exposure
  std::vector<FlowField> flows;    ///< blurred frame t -> t + 1 (empty when objects move)
  std::vector<double> speeds;      ///< camera speed during each exposure
};

/// Frame t averages sub-frames t*N .. t*N + N - 1 (continuous exposure).
BlurredVideo render_blurred_video(const std::string& id, const BlurStyle& style, int frames, int height, int width,
                                  int exposure, std::uint64_t seed);

struct ToyCorpusOptions {
  std::uint64_t seed = 2024;
  int exposure = kDefaultExposureFrames;

  int bme_sequences = 64;
  int bme_size = 128;
  double bme_max_speed = 3.0;

  int source_videos = 4;
  int source_frames = 12;
  int source_size = 128;
  BlurStyle source_style{{1.0, 0.0}, 0.4, 2.4, 0.0, 0.1, 2};

  int target_videos = 6;
  int target_frames = 20;
  int target_size = 288;
  int eval_videos = 2;
  int eval_frames = 12;
  BlurStyle target_style{{0.0, 1.0}, 1.0, 2.4, 0.3, 0.1, 0};

  nlohmann::json to_json() const;
  static ToyCorpusOptions from_json(const nlohmann::json& j);
};

struct ToyCorpus {
  std::vector<SharpSequence> sequences;
  InjectedFlowEstimator sequence_flows;
  std::vector<BlurredVideo> source;
  std::vector<BlurredVideo> target;
  InjectedFlowEstimator target_flows;
  std::vector<BlurredVideo> eval;
};

ToyCorpus make_toy_corpus(const ToyCorpusOptions& options);

/// Layout under `root`:
///   sequences/<id>/frame_*.png, sequence_flows/<id>/<from>_<to>.flo,
///   source/<id>/{blur,sharp}/frame_*.png, target/<id>/frame_*.png,
///   target_flows/<id>/<from>_<to>.flo, eval/<id>/{blur,sharp}/frame_*.png,
///   corpus.json.
void write_toy_corpus(const std::filesystem::path& root, const ToyCorpus& corpus, const ToyCorpusOptions& options);

adapt::EvalVideo as_eval_video(const BlurredVideo& v);

}  // namespace ttdeblur::synth
