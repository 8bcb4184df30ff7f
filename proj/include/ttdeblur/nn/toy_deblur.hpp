#pragma once

// Small residual CNN over a 3-frame window with L1 loss; the desk-scale
// stand-in for a video deblurring network.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>

#include <json.hpp>
#include <torch/torch.h>

#include "ttdeblur/adapt.hpp"
#include "ttdeblur/synth.hpp"

namespace ttdeblur::nn {

struct ToyDeblurConfig {
  int channels = 16;
  int window = 3;
  double finetune_lr = 1e-4;
  /// Random square crop used by fine-tuning steps; 0 trains on whole patches.
  int finetune_crop = 128;

  nlohmann::json to_json() const;
  static ToyDeblurConfig from_json(const nlohmann::json& j);
};

class ToyDeblurNetImpl : public torch::nn::Module {
 public:
  ToyDeblurNetImpl(int channels, int window);
  /// [N, 3 * window, H, W] -> restored center frame [N, 3, H, W]; H, W multiples of 4.
  torch::Tensor forward(torch::Tensor x);

 private:
  int window_;
  torch::nn::Conv2d head_{nullptr};
  torch::nn::Conv2d down1_{nullptr}, conv1_{nullptr};
  torch::nn::Conv2d down2_{nullptr}, conv2_{nullptr};
  torch::nn::Conv2d up1_{nullptr}, up0_{nullptr};
  torch::nn::Conv2d tail_{nullptr};
};
TORCH_MODULE(ToyDeblurNet);

class ToyDeblurModel final : public adapt::DeblurringModel {
 public:
  ToyDeblurModel(ToyDeblurConfig config, std::uint64_t seed);

  int window_frames() const override { return config_.window; }
  Frame deblur(std::span<const Frame> window) const override;
  void start_finetune(std::uint64_t seed) override;
  double finetune_step(std::span<const adapt::PseudoPair* const> batch) override;
  std::unique_ptr<adapt::DeblurringModel> clone() const override;
  std::uint64_t parameter_checksum() const override;
  std::string name() const override { return "toy-deblur"; }

  const ToyDeblurConfig& config() const { return config_; }
  ToyDeblurNet net() const { return net_; }

  /// One optimizer step of L1 against `sharp`; inputs are [N, 3 * window, H, W].
  double train_step(torch::optim::Optimizer& optimizer, const torch::Tensor& inputs, const torch::Tensor& sharp);

  void save(const std::filesystem::path& path) const;
  static ToyDeblurModel load(const std::filesystem::path& path);

 private:
  ToyDeblurConfig config_;
  mutable ToyDeblurNet net_;
  std::unique_ptr<torch::optim::Adam> optimizer_;
  std::optional<synth::SplitMix64> rng_;
};

struct SourceTrainOptions {
  int steps = 400;
  int batch_size = 8;
  int crop = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

/// Supervised training on paired (blurred, sharp) videos with random crops of
/// edge-replicated temporal windows. Returns the per-step loss.
std::vector<double> train_on_videos(ToyDeblurModel& model, std::span<const adapt::EvalVideo> videos,
                                    const SourceTrainOptions& options);

}  // namespace ttdeblur::nn
