#pragma once

// Blur Magnitude Estimator: five-stage convolutional encoder-decoder with
// multi-scale feature fusion, its L1 training loop and inference wrapper.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "ttdeblur/dbcgm.hpp"
#include "ttdeblur/synth.hpp"

namespace ttdeblur::nn {

inline constexpr int kStageCount = 5;
/// Four stride-2 stages: inference inputs are padded to this multiple.
inline constexpr int kSizeMultiple = 16;

struct BMEConfig {
  int base_channels = 32;
  int input_size = 320;
  double lr_init = 1e-3;
  double lr_final = 1e-4;
  int batch_size = 16;
  int epochs = 50;
  bool augment = true;
  bool toy_mode = false;

  /// Desk-scale settings: 4 base channels, 128 x 128 inputs, lr 1e-2 -> 1e-4.
  static BMEConfig toy();
  void validate() const;
  std::array<int, kStageCount> widths() const;

  nlohmann::json to_json() const;
  static BMEConfig from_json(const nlohmann::json& j);
};

/// Encoder stages fused into the features of stage k.
std::array<int, 3> msff_sources(int k);

class MSFFImpl : public torch::nn::Module {
 public:
  MSFFImpl(int k, const std::array<int, kStageCount>& widths);
  /// `features` holds E_0 .. E_4; the output has the spatial size of E_k.
  torch::Tensor forward(const std::vector<torch::Tensor>& features);
  int stage() const { return k_; }

 private:
  int k_;
  std::array<torch::nn::Conv2d, 3> inputs_{nullptr, nullptr, nullptr};
  torch::nn::Conv2d mix_{nullptr};
  torch::nn::Conv2d out_{nullptr};
};
TORCH_MODULE(MSFF);

class BMENetImpl : public torch::nn::Module {
 public:
  explicit BMENetImpl(int base_channels);
  /// [N, 3, H, W] -> [N, 1, H, W] in (0, 1).
  torch::Tensor forward(torch::Tensor x);
  std::vector<torch::Tensor> encode(torch::Tensor x);
  const std::array<int, kStageCount>& widths() const { return widths_; }

 private:
  std::array<int, kStageCount> widths_;
  std::vector<torch::nn::Sequential> encoder_;
  std::vector<MSFF> fusion_;
  std::vector<torch::nn::Sequential> decoder_;  // decoder_[k] produces level k, k = 0 .. 3
  torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(BMENet);

struct BMETrainLog {
  std::vector<double> epoch_l1;
  int steps = 0;
};

class BMEModel final : public dbcgm::MagnitudeEstimator {
 public:
  BMEModel(BMEConfig config, Tau tau, std::uint64_t seed);
  BMEModel(BMEConfig config, Tau tau, BMENet net);

  /// Per-pixel magnitude map; frames are reflect-padded to a multiple of 16
  /// and cropped back.
  BlurMagnitudeMap estimate(const Frame& frame) const override;
  bool concurrent_safe() const override { return true; }

  const BMEConfig& config() const { return config_; }
  Tau tau() const { return tau_; }
  BMENet net() const { return net_; }

  /// Writes the parameter archive and a bme_meta.json sidecar next to it.
  void save(const std::filesystem::path& path) const;
  static BMEModel load(const std::filesystem::path& path);
  static std::filesystem::path meta_path(const std::filesystem::path& checkpoint);

 private:
  BMEConfig config_;
  Tau tau_;
  mutable BMENet net_;
};

struct BMETrainResult {
  BMEModel model;
  BMETrainLog log;
};

/// L1 training with Adam and cosine learning-rate decay from lr_init to
/// lr_final. `max_steps` > 0 stops early.
BMETrainResult train_bme(std::span<const synth::TrainingSample> samples, Tau tau, const BMEConfig& config,
                         std::uint64_t seed, int max_steps = 0);

/// Cosine-annealed learning rate at `step` of `total_steps`.
double cosine_lr(double lr_init, double lr_final, int step, int total_steps);

}  // namespace ttdeblur::nn
