#pragma once

// Test-time adaptation loop: pseudo-pair assembly, fine-tuning through a
// pluggable deblurring model, and PSNR/SSIM evaluation. Also hosts the
// ablation alternatives for patch mining and condition generation.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ttdeblur/backends.hpp"
#include "ttdeblur/dbcgm.hpp"
#include "ttdeblur/rsdm.hpp"

namespace ttdeblur::adapt {

enum class PatchMode { rsdm, random };
enum class ConditionMode { dbcgm, flow, random };

std::string to_string(PatchMode m);
std::string to_string(ConditionMode m);
PatchMode parse_patch_mode(const std::string& s);
ConditionMode parse_condition_mode(const std::string& s);

struct Provenance {
  std::string video_id;
  int frame = 0;
  Window window;
  std::string backend;
  std::uint64_t seed = 0;
  std::string condition_mode;
};

struct PseudoPair {
  Frame sharp;
  Frame blurred;
  BlurConditionField condition;
  Provenance provenance;
};

/// Produces the blur condition for a collocated window.
using ConditionSource = std::function<BlurConditionField(const dbcgm::CollocatedWindow&)>;

/// DBCGM: flow orientation + adapted magnitudes.
ConditionSource dbcgm_conditions(const FlowEstimator& flow, const dbcgm::MagnitudeEstimator& magnitude,
                                 dbcgm::ConditionOptions options = {});

/// Raw accumulated window flow as the blur: unit direction of the trajectory,
/// z = min(|F| / tau, 1) so the rendered length equals the flow length.
ConditionSource flow_conditions(const FlowEstimator& flow, Tau tau);

/// Orientation uniform on the unit circle and magnitude uniform in [0, 1],
/// constant over `block` x `block` pixel blocks. Seeded per (video, frame).
ConditionSource random_conditions(std::uint64_t seed, int block = 32);

/// Random eligible frames (t-2 .. t+2 inside the video) and random in-bounds
/// windows, `count` of them, without frame repetition.
std::vector<rsdm::PatchSelection> random_selections(const std::string& video_id, int frame_count, Shape frame_shape,
                                                    int count, int patch, std::uint64_t seed);

struct VideoFrames {
  std::string id;
  std::vector<Frame> frames;
};

struct PseudoDataset {
  std::vector<PseudoPair> pairs;
  std::vector<std::string> failures;
};

/// One pair per selection. Failures of individual selections are recorded and
/// skipped; throws if none survive.
PseudoDataset build_pseudo_dataset(std::span<const rsdm::PatchSelection> selections,
                                   std::span<const VideoFrames> videos, const ConditionSource& conditions,
                                   const BlurringModel& backend, const std::string& condition_label,
                                   std::uint64_t seed);

/// patches/<video>/t<frame>.png, pairs/<video>/t<frame>_blurred.png and
/// conditions/<video>/t<frame>.bcf under `root`. Returns the written paths.
std::vector<std::filesystem::path> write_pairs(const std::filesystem::path& root, std::span<const PseudoPair> pairs);

/// Pluggable video deblurring model. `deblur` restores the center frame of
/// an odd-length temporal window; fine-tuning uses the model's own loss.
class DeblurringModel {
 public:
  virtual ~DeblurringModel() = default;
  virtual int window_frames() const = 0;
  virtual Frame deblur(std::span<const Frame> window) const = 0;
  /// Resets optimizer state and the model's internal sampling RNG.
  virtual void start_finetune(std::uint64_t seed) = 0;
  /// One optimizer step on the batch; returns the native loss value.
  virtual double finetune_step(std::span<const PseudoPair* const> batch) = 0;
  virtual std::unique_ptr<DeblurringModel> clone() const = 0;
  virtual std::uint64_t parameter_checksum() const = 0;
  virtual std::string name() const = 0;
};

struct FinetuneOptions {
  int epochs = 10;
  int batch_size = 2;
  std::uint64_t seed = 0;
};

struct FinetuneLog {
  std::vector<double> epoch_loss;
};

/// Runs `epochs` passes over seeded shuffles of `pairs`. The pairs are read only.
FinetuneLog finetune(DeblurringModel& model, std::span<const PseudoPair> pairs, const FinetuneOptions& options);

struct EvalVideo {
  std::string id;
  std::vector<Frame> blurred;
  std::vector<Frame> sharp;
};

struct VideoMetrics {
  std::string id;
  double psnr = 0.0;  ///< may be +infinity
  double ssim = 0.0;
  int frames = 0;
};

struct MetricsSummary {
  std::vector<VideoMetrics> videos;
  double psnr = 0.0;  ///< mean of per-video means; +infinity if any frame is exact
  double ssim = 0.0;
};

/// Restores every frame (edge-replicated temporal windows) and scores it.
MetricsSummary evaluate(const DeblurringModel& model, std::span<const EvalVideo> videos);

/// Scores the blurred inputs themselves (no restoration).
MetricsSummary evaluate_identity(std::span<const EvalVideo> videos);

/// Temporal window of `size` frames around `center`, replicating the edges.
std::vector<Frame> temporal_window(std::span<const Frame> frames, int center, int size);

struct MetricsReport {
  std::string dataset;
  std::string model;
  MetricsSummary baseline;
  MetricsSummary adapted;
};

std::string format_table(const MetricsReport& report);

std::uint64_t checksum(const Frame& f, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t checksum(std::span<const PseudoPair> pairs);

}  // namespace ttdeblur::adapt
