#pragma once

// TorchScript adapters for a pre-trained optical flow network (RAFT-style)
// and a conditional diffusion blurring model (ID-Blau-style).

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>

#include <json.hpp>
#include <torch/script.h>

#include "ttdeblur/backends.hpp"

namespace ttdeblur::nn {

struct RaftOptions {
  /// Multiplier applied to [0, 1] frames before the network (RAFT expects 0..255).
  double input_scale = 255.0;

  nlohmann::json to_json() const;
  static RaftOptions from_json(const nlohmann::json& j);
};

/// Scripted module called as forward(image1, image2) with [1, 3, H, W]
/// inputs padded to a multiple of 8. The output is a [1, 2, H, W] flow or a
/// list of iterative refinements, of which the last is used.
class RaftFlowEstimator final : public FlowEstimator {
 public:
  RaftFlowEstimator(torch::jit::Module module, RaftOptions options, std::filesystem::path path);

  FlowField estimate(const Frame& a, const Frame& b, const FramePairId& id) const override;
  bool concurrent_safe() const override { return false; }
  std::string kind() const override { return "raft"; }

 private:
  mutable torch::jit::Module module_;
  mutable std::mutex mutex_;
  RaftOptions options_;
  std::filesystem::path path_;
};

std::unique_ptr<RaftFlowEstimator> raft_adapter_load(const std::filesystem::path& checkpoint, RaftOptions options = {});

struct DiffusionSamplerConfig {
  int train_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int sample_steps = 50;
  /// Seeded sampling is deterministic per input; unseeded draws fresh noise.
  std::optional<std::uint64_t> seed;

  void validate() const;
  nlohmann::json to_json() const;
  static DiffusionSamplerConfig from_json(const nlohmann::json& j);
};

/// Deterministic DDIM (eta = 0) over a scripted noise predictor called as
/// forward(x_t, sharp, cond, t): x_t and sharp in [-1, 1] as [1, 3, H, W],
/// cond as [1, 3, H, W] (x, y, z), t as an int64 [1] timestep.
class IdBlauBlurringModel final : public BlurringModel {
 public:
  IdBlauBlurringModel(torch::jit::Module module, DiffusionSamplerConfig config, std::filesystem::path path);

  Frame blur(const Frame& sharp, const BlurConditionField& cond) const override;
  bool concurrent_safe() const override { return false; }
  bool stochastic() const override { return !config_.seed.has_value(); }
  std::string kind() const override { return "idblau"; }

  const DiffusionSamplerConfig& config() const { return config_; }
  /// Timesteps visited by the sampler, descending.
  std::vector<int> timesteps() const;

 private:
  mutable torch::jit::Module module_;
  mutable std::mutex mutex_;
  DiffusionSamplerConfig config_;
  std::filesystem::path path_;
  torch::Tensor alpha_bar_;
};

std::unique_ptr<IdBlauBlurringModel> idblau_adapter_load(const std::filesystem::path& checkpoint,
                                                         DiffusionSamplerConfig config = {});

}  // namespace ttdeblur::nn
