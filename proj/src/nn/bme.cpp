#include "ttdeblur/nn/bme.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "ttdeblur/error.hpp"
#include "ttdeblur/nn/tensor.hpp"

namespace F = torch::nn::functional;

namespace ttdeblur::nn {

namespace {

torch::nn::Conv2d conv(int in, int out, int kernel, int stride = 1) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, kernel).stride(stride).padding(kernel / 2));
}

torch::Tensor resize_to(const torch::Tensor& x, const torch::Tensor& like) {
  if (x.size(2) == like.size(2) && x.size(3) == like.size(3)) return x;
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .size(std::vector<int64_t>{like.size(2), like.size(3)})
                               .mode(torch::kBilinear)
                               .align_corners(false));
}

const char* kMetaKey = "ttdeblur_meta";

torch::nn::Sequential conv_block(int in, int out, int stride) {
  return torch::nn::Sequential(conv(in, out, 3, stride), torch::nn::BatchNorm2d(out), torch::nn::ReLU(),
                               conv(out, out, 3), torch::nn::BatchNorm2d(out), torch::nn::ReLU());
}

}  // namespace

BMEConfig BMEConfig::toy() {
  BMEConfig c;
  c.base_channels = 4;
  c.input_size = 128;
  c.lr_init = 1e-2;
  c.toy_mode = true;
  return c;
}

void BMEConfig::validate() const {
  if (base_channels < 1) throw InvalidInput("BMEConfig: base_channels must be positive");
  if (input_size < kSizeMultiple || input_size % kSizeMultiple != 0) {
    throw InvalidInput("BMEConfig: input_size must be a positive multiple of 16");
  }
  if (!(lr_final > 0.0 && lr_init >= lr_final)) throw InvalidInput("BMEConfig: need lr_init >= lr_final > 0");
  if (batch_size < 1) throw InvalidInput("BMEConfig: batch_size must be >= 1");
  if (epochs < 0) throw InvalidInput("BMEConfig: epochs must be >= 0");
}

std::array<int, kStageCount> BMEConfig::widths() const {
  const int c = base_channels;
  return {c, 2 * c, 4 * c, 8 * c, 8 * c};
}

nlohmann::json BMEConfig::to_json() const {
  return {{"base_channels", base_channels}, {"input_size", input_size}, {"lr_init", lr_init},
          {"lr_final", lr_final},           {"schedule", "cosine"},     {"batch_size", batch_size},
          {"epochs", epochs},               {"augment", augment},       {"toy_mode", toy_mode},
          {"stage_count", kStageCount},     {"downsample_factor", 2}};
}

BMEConfig BMEConfig::from_json(const nlohmann::json& j) {
  BMEConfig c = j.value("toy_mode", false) ? toy() : BMEConfig{};
  c.base_channels = j.value("base_channels", c.base_channels);
  c.input_size = j.value("input_size", c.input_size);
  c.lr_init = j.value("lr_init", c.lr_init);
  c.lr_final = j.value("lr_final", c.lr_final);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.augment = j.value("augment", c.augment);
  if (j.value("schedule", std::string("cosine")) != "cosine") throw InvalidInput("BMEConfig: only cosine schedule");
  c.validate();
  return c;
}

std::array<int, 3> msff_sources(int k) {
  if (k < 0 || k >= kStageCount) throw InvalidInput("msff_sources: stage index out of range");
  if (k == 0) return {0, 1, 2};
  if (k == kStageCount - 1) return {4, 3, 2};
  return {k - 1, k, k + 1};
}

MSFFImpl::MSFFImpl(int k, const std::array<int, kStageCount>& widths) : k_(k) {
  const auto src = msff_sources(k);
  const int w = widths[static_cast<std::size_t>(k)];
  for (int i = 0; i < 3; ++i) {
    inputs_[static_cast<std::size_t>(i)] =
        register_module("in" + std::to_string(i), conv(widths[static_cast<std::size_t>(src[static_cast<std::size_t>(i)])], w, 3));
  }
  mix_ = register_module("mix", conv(3 * w, w, 1));
  out_ = register_module("out", conv(w, w, 3));
}

torch::Tensor MSFFImpl::forward(const std::vector<torch::Tensor>& features) {
  if (features.size() != kStageCount) throw InvalidInput("msff: expected 5 stage features");
  for (const auto& f : features) {
    if (!f.defined()) throw InvalidInput("msff: missing stage feature");
  }
  const auto src = msff_sources(k_);
  const torch::Tensor& target = features[static_cast<std::size_t>(k_)];
  std::vector<torch::Tensor> parts;
  for (int i = 0; i < 3; ++i) {
    const auto& e = features[static_cast<std::size_t>(src[static_cast<std::size_t>(i)])];
    parts.push_back(resize_to(inputs_[static_cast<std::size_t>(i)]->forward(e), target));
  }
  return out_->forward(torch::relu(mix_->forward(torch::cat(parts, 1))));
}

BMENetImpl::BMENetImpl(int base_channels) {
  if (base_channels < 1) throw InvalidInput("BMENet: base_channels must be positive");
  const int c = base_channels;
  widths_ = {c, 2 * c, 4 * c, 8 * c, 8 * c};
  for (int k = 0; k < kStageCount; ++k) {
    const int in = k == 0 ? 3 : widths_[static_cast<std::size_t>(k - 1)];
    const int w = widths_[static_cast<std::size_t>(k)];
    encoder_.push_back(register_module("enc" + std::to_string(k), conv_block(in, w, k == 0 ? 1 : 2)));
    fusion_.push_back(register_module("msff" + std::to_string(k), MSFF(k, widths_)));
  }
  for (int k = 0; k < kStageCount - 1; ++k) {
    const int w = widths_[static_cast<std::size_t>(k)];
    const int up = widths_[static_cast<std::size_t>(k + 1)];
    decoder_.push_back(register_module("dec" + std::to_string(k), conv_block(up + w, w, 1)));
  }
  head_ = register_module("head", conv(c, 1, 1));
}

std::vector<torch::Tensor> BMENetImpl::encode(torch::Tensor x) {
  x = (x - 0.5) * 2.0;
  std::vector<torch::Tensor> features;
  for (auto& stage : encoder_) {
    x = stage->forward(x);
    features.push_back(x);
  }
  return features;
}

torch::Tensor BMENetImpl::forward(torch::Tensor x) {
  const auto features = encode(x);
  std::vector<torch::Tensor> fused;
  for (auto& m : fusion_) fused.push_back(m->forward(features));
  torch::Tensor d = torch::relu(fused[kStageCount - 1]);
  for (int k = kStageCount - 2; k >= 0; --k) {
    const auto& skip = fused[static_cast<std::size_t>(k)];
    d = decoder_[static_cast<std::size_t>(k)]->forward(torch::cat({resize_to(d, skip), skip}, 1));
  }
  return torch::sigmoid(head_->forward(d));
}

BMEModel::BMEModel(BMEConfig config, Tau tau, std::uint64_t seed) : config_(config), tau_(tau), net_(nullptr) {
  config_.validate();
  torch::manual_seed(seed);
  net_ = BMENet(config_.base_channels);
  net_->eval();
}

BMEModel::BMEModel(BMEConfig config, Tau tau, BMENet net) : config_(config), tau_(tau), net_(std::move(net)) {
  config_.validate();
  net_->eval();
}

BlurMagnitudeMap BMEModel::estimate(const Frame& frame) const {
  torch::NoGradGuard no_grad;
  const Frame rgb = as_rgb(frame);
  auto x = to_tensor(rgb).unsqueeze(0);
  x = pad_to_multiple(x, kSizeMultiple);
  auto y = net_->forward(x);
  y = y.index({0, 0, torch::indexing::Slice(0, frame.height()), torch::indexing::Slice(0, frame.width())});
  BlurMagnitudeMap out{to_plane(y)};
  for (float& v : out.m.values()) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

std::filesystem::path BMEModel::meta_path(const std::filesystem::path& checkpoint) {
  return checkpoint.parent_path() / "bme_meta.json";
}

void BMEModel::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  nlohmann::json meta = {
      {"architecture", {{"name", "bme-msff"}, {"stage_count", kStageCount}, {"widths", config_.widths()}}},
      {"tau", tau_.value()},
      {"config", config_.to_json()},
  };
  torch::serialize::OutputArchive archive;
  net_->save(archive);
  archive.write(kMetaKey, c10::IValue(meta.dump()));
  archive.save_to(path.string());
  std::ofstream(meta_path(path)) << meta.dump(2) << "\n";
}

BMEModel BMEModel::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw LoadError("BME checkpoint not found: " + path.string());
  try {
    torch::serialize::InputArchive archive;
    archive.load_from(path.string());
    c10::IValue meta_value;
    if (!archive.try_read(kMetaKey, meta_value)) throw LoadError("BME checkpoint without metadata: " + path.string());
    const auto meta = nlohmann::json::parse(meta_value.toStringRef());
    const BMEConfig config = BMEConfig::from_json(meta.at("config"));
    BMENet net(config.base_channels);
    net->load(archive);
    net->eval();
    return BMEModel(config, Tau(meta.at("tau").get<double>()), net);
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError("cannot load BME checkpoint " + path.string() + ": " + e.what());
  }
}

double cosine_lr(double lr_init, double lr_final, int step, int total_steps) {
  if (total_steps <= 1) return lr_init;
  const double t = static_cast<double>(step) / (total_steps - 1);
  return lr_final + 0.5 * (lr_init - lr_final) * (1.0 + std::cos(M_PI * t));
}

namespace {

torch::Tensor resize_square(const torch::Tensor& chw, int size) {
  if (chw.size(1) == size && chw.size(2) == size) return chw;
  return F::interpolate(chw.unsqueeze(0), F::InterpolateFuncOptions()
                                              .size(std::vector<int64_t>{size, size})
                                              .mode(torch::kBilinear)
                                              .align_corners(false))
      .squeeze(0);
}

torch::Tensor augment(torch::Tensor t, bool flip_h, bool flip_v, int rot) {
  if (flip_h) t = torch::flip(t, {2});
  if (flip_v) t = torch::flip(t, {1});
  if (rot) t = torch::rot90(t, rot, {1, 2});
  return t;
}

}  // namespace

BMETrainResult train_bme(std::span<const synth::TrainingSample> samples, Tau tau, const BMEConfig& config,
                         std::uint64_t seed, int max_steps) {
  if (samples.empty()) throw InvalidInput("train_bme: empty dataset");
  config.validate();

  std::vector<torch::Tensor> inputs;
  std::vector<torch::Tensor> targets;
  for (const auto& s : samples) {
    require_same_shape(s.blurred.shape(), s.magnitude_gt.shape(), "train_bme");
    inputs.push_back(resize_square(to_tensor(as_rgb(s.blurred)), config.input_size));
    targets.push_back(resize_square(to_tensor(s.magnitude_gt.m).unsqueeze(0), config.input_size));
  }

  BMEModel model(config, tau, seed);
  BMENet net = model.net();
  net->train();
  torch::optim::Adam optimizer(net->parameters(), torch::optim::AdamOptions(config.lr_init).weight_decay(0.0));

  const int n = static_cast<int>(samples.size());
  const int steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  int total_steps = steps_per_epoch * config.epochs;
  if (max_steps > 0) total_steps = std::min(total_steps, max_steps);

  synth::SplitMix64 rng(seed ^ 0xB3E0B3E0ull);
  BMETrainLog log;
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int epoch = 0; epoch < config.epochs && log.steps < total_steps; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.next() % i]);
    double loss_sum = 0.0;
    int seen = 0;
    for (int start = 0; start < n && log.steps < total_steps; start += config.batch_size) {
      std::vector<torch::Tensor> xb;
      std::vector<torch::Tensor> yb;
      for (int k = start; k < std::min(n, start + config.batch_size); ++k) {
        const auto idx = static_cast<std::size_t>(order[static_cast<std::size_t>(k)]);
        bool fh = false, fv = false;
        int rot = 0;
        if (config.augment) {
          const std::uint64_t r = rng.next();
          fh = r & 1u;
          fv = (r >> 1) & 1u;
          rot = static_cast<int>((r >> 2) & 3u);
        }
        xb.push_back(augment(inputs[idx], fh, fv, rot));
        yb.push_back(augment(targets[idx], fh, fv, rot));
      }
      for (auto& group : optimizer.param_groups()) {
        static_cast<torch::optim::AdamOptions&>(group.options()).lr(cosine_lr(config.lr_init, config.lr_final,
                                                                                log.steps, total_steps));
      }
      optimizer.zero_grad();
      const auto x = torch::stack(xb);
      const auto loss = torch::l1_loss(net->forward(x), torch::stack(yb));
      loss.backward();
      optimizer.step();
      loss_sum += loss.item<double>() * static_cast<double>(x.size(0));
      seen += static_cast<int>(x.size(0));
      ++log.steps;
    }
    log.epoch_l1.push_back(loss_sum / seen);
  }
  net->eval();
  return {std::move(model), std::move(log)};
}

}  // namespace ttdeblur::nn
