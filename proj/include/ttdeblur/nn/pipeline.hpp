#pragma once

// End-to-end commands: configuration, frame ingestion, stage caching and
// the prepare-data / train-bme / adapt / ablate / evaluate pipeline.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ttdeblur/adapt.hpp"
#include "ttdeblur/nn/bme.hpp"
#include "ttdeblur/nn/neural_backends.hpp"
#include "ttdeblur/nn/toy_deblur.hpp"
#include "ttdeblur/rsdm.hpp"
#include "ttdeblur/toy_corpus.hpp"

namespace ttdeblur::pipeline {

namespace fs = std::filesystem;

struct Paths {
  fs::path sequences;          ///< sharp high-frame-rate sequences, one directory each
  fs::path dataset;            ///< BME training set written by prepare-data
  fs::path bme_checkpoint;
  fs::path deblur_checkpoint;  ///< source-trained deblurring model
  fs::path source_videos;      ///< <id>/{blur,sharp}/ paired videos for train-deblur
  fs::path target_videos;      ///< <id>/ blurred target-domain videos
  fs::path eval_videos;        ///< <id>/{blur,sharp}/ held-out target videos
  fs::path adapted_checkpoint; ///< optional input of evaluate
  fs::path output;
};

struct FlowSpec {
  std::string kind = "injected";  ///< injected | raft
  fs::path root;                  ///< injected: <root>/<video>/<from>_<to>.flo
  fs::path checkpoint;            ///< raft: scripted module
  nn::RaftOptions raft;
};

struct BlurringSpec {
  std::string kind = "oracle";  ///< oracle | idblau
  int steps = 15;               ///< oracle trajectory samples
  std::optional<double> tau;    ///< oracle length scale; defaults to the BME corpus tau
  fs::path checkpoint;          ///< idblau: scripted noise predictor
  nn::DiffusionSamplerConfig sampler;
};

struct AblationGrid {
  std::vector<adapt::PatchMode> patch_modes{adapt::PatchMode::random, adapt::PatchMode::rsdm};
  std::vector<adapt::ConditionMode> condition_modes{adapt::ConditionMode::random, adapt::ConditionMode::flow,
                                                     adapt::ConditionMode::dbcgm};
  std::vector<double> ratios;  ///< empty: only the configured r
};

struct PipelineConfig {
  Paths paths;
  double r = rsdm::kDefaultRatio;
  int patch = rsdm::kPatchSize;
  int stride = rsdm::kDefaultStride;
  int epochs = 10;
  int batch_size = 2;
  std::uint64_t seed = 0;
  int threads = 1;

  adapt::PatchMode patch_mode = adapt::PatchMode::rsdm;
  adapt::ConditionMode condition_mode = adapt::ConditionMode::dbcgm;
  std::optional<std::pair<double, double>> ratio_range;
  rsdm::CropMode crop_mode = rsdm::CropMode::window_search;
  NeighborAverage neighbor_average = NeighborAverage::elementwise;
  int random_condition_block = 32;

  synth::CrfSpec crf;
  FlowSpec sequence_flow;
  FlowSpec flow;
  BlurringSpec blurring;

  nn::BMEConfig bme;
  int bme_max_steps = 0;  ///< 0: config.epochs full passes

  nn::ToyDeblurConfig deblur;
  nn::SourceTrainOptions source_training;

  AblationGrid ablation;
  synth::ToyCorpusOptions toy;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
};

/// `file` (may be empty) merged over the defaults, then each "a.b=value"
/// override applied in order. Values parse as JSON, falling back to strings.
PipelineConfig load_config(const fs::path& file, const std::vector<std::string>& overrides);

/// Paths and settings for a corpus written by cmd_make_toy under `root`.
nlohmann::json toy_config_json(const fs::path& root);

struct CacheEntry {
  std::string stage;
  std::string key;
  std::map<std::string, std::string> artifacts;  ///< relative path -> content hash
};

/// Stage cache at <root>/cache/<stage>.json. A hit requires the same key and
/// every recorded artifact present with its recorded hash.
class StageCache {
 public:
  explicit StageCache(fs::path root) : root_(std::move(root)) {}
  bool hit(const std::string& stage, const std::string& key) const;
  CacheEntry record(const std::string& stage, const std::string& key, const std::vector<fs::path>& artifacts) const;
  std::optional<CacheEntry> load(const std::string& stage) const;
  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
};

struct StageOutcome {
  std::string stage;
  bool cached = false;
  std::string key;
};

struct CommandResult {
  std::vector<StageOutcome> stages;
  nlohmann::json summary;
};

CommandResult cmd_make_toy(const PipelineConfig& config);
CommandResult cmd_prepare_data(const PipelineConfig& config);
CommandResult cmd_train_bme(const PipelineConfig& config);
CommandResult cmd_train_deblur(const PipelineConfig& config);
CommandResult cmd_adapt(const PipelineConfig& config);
CommandResult cmd_ablate(const PipelineConfig& config);
CommandResult cmd_evaluate(const PipelineConfig& config);

/// Paired videos laid out as <root>/<id>/{blur,sharp}/frame_*.png.
std::vector<adapt::EvalVideo> read_paired_videos(const fs::path& root);
std::vector<adapt::VideoFrames> read_videos(const fs::path& root);

nlohmann::json metrics_json(const adapt::MetricsSummary& m);

}  // namespace ttdeblur::pipeline
