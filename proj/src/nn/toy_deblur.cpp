#include "ttdeblur/nn/toy_deblur.hpp"

#include <fstream>

#include "ttdeblur/error.hpp"
#include "ttdeblur/nn/tensor.hpp"

namespace F = torch::nn::functional;

namespace ttdeblur::nn {

namespace {

torch::nn::Conv2d conv(int in, int out, int stride = 1) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).stride(stride).padding(1));
}

torch::Tensor upsample_like(const torch::Tensor& x, const torch::Tensor& like) {
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .size(std::vector<int64_t>{like.size(2), like.size(3)})
                               .mode(torch::kBilinear)
                               .align_corners(false));
}

const char* kMetaKey = "ttdeblur_meta";

torch::Tensor window_tensor(std::span<const Frame> window) {
  std::vector<torch::Tensor> ts;
  for (const auto& f : window) ts.push_back(to_tensor(as_rgb(f)));
  return torch::cat(ts, 0);
}

}  // namespace

nlohmann::json ToyDeblurConfig::to_json() const {
  return {{"channels", channels}, {"window", window}, {"finetune_lr", finetune_lr}, {"finetune_crop", finetune_crop}};
}

ToyDeblurConfig ToyDeblurConfig::from_json(const nlohmann::json& j) {
  ToyDeblurConfig c;
  c.channels = j.value("channels", c.channels);
  c.window = j.value("window", c.window);
  c.finetune_lr = j.value("finetune_lr", c.finetune_lr);
  c.finetune_crop = j.value("finetune_crop", c.finetune_crop);
  if (c.channels < 1 || c.window < 1 || c.window % 2 == 0 || !(c.finetune_lr > 0.0) || c.finetune_crop < 0) {
    throw InvalidInput("toy deblur config: invalid channels, window, finetune_lr or finetune_crop");
  }
  return c;
}

ToyDeblurNetImpl::ToyDeblurNetImpl(int channels, int window) : window_(window) {
  const int c = channels;
  head_ = register_module("head", conv(3 * window, c));
  down1_ = register_module("down1", conv(c, 2 * c, 2));
  conv1_ = register_module("conv1", conv(2 * c, 2 * c));
  down2_ = register_module("down2", conv(2 * c, 2 * c, 2));
  conv2_ = register_module("conv2", conv(2 * c, 2 * c));
  up1_ = register_module("up1", conv(4 * c, 2 * c));
  up0_ = register_module("up0", conv(3 * c, c));
  tail_ = register_module("tail", conv(c, 3));
}

torch::Tensor ToyDeblurNetImpl::forward(torch::Tensor x) {
  const auto center = x.narrow(1, 3 * (window_ / 2), 3);
  const auto h0 = torch::relu(head_->forward(x));
  const auto h1 = torch::relu(conv1_->forward(torch::relu(down1_->forward(h0))));
  const auto h2 = torch::relu(conv2_->forward(torch::relu(down2_->forward(h1))));
  auto u1 = torch::relu(up1_->forward(torch::cat({upsample_like(h2, h1), h1}, 1)));
  auto u0 = torch::relu(up0_->forward(torch::cat({upsample_like(u1, h0), h0}, 1)));
  return center + tail_->forward(u0);
}

ToyDeblurModel::ToyDeblurModel(ToyDeblurConfig config, std::uint64_t seed) : config_(config), net_(nullptr) {
  torch::manual_seed(seed);
  net_ = ToyDeblurNet(config_.channels, config_.window);
}

Frame ToyDeblurModel::deblur(std::span<const Frame> window) const {
  if (static_cast<int>(window.size()) != config_.window) {
    throw InvalidInput("toy deblur: expected a window of " + std::to_string(config_.window) + " frames");
  }
  for (const auto& f : window) require_same_shape(f.shape(), window.front().shape(), "toy deblur");
  torch::NoGradGuard no_grad;
  const Shape shape = window.front().shape();
  auto x = pad_to_multiple(window_tensor(window).unsqueeze(0), 4);
  auto y = net_->forward(x).index({0, torch::indexing::Slice(), torch::indexing::Slice(0, shape.height),
                                   torch::indexing::Slice(0, shape.width)});
  Frame out = to_frame(y);
  out.clamp01();
  return out;
}

void ToyDeblurModel::start_finetune(std::uint64_t seed) {
  optimizer_ = std::make_unique<torch::optim::Adam>(net_->parameters(), torch::optim::AdamOptions(config_.finetune_lr));
  rng_.emplace(seed ^ 0xF1E7F1E7ull);
}

double ToyDeblurModel::train_step(torch::optim::Optimizer& optimizer, const torch::Tensor& inputs,
                                  const torch::Tensor& sharp) {
  net_->train();
  optimizer.zero_grad();
  const auto loss = torch::l1_loss(net_->forward(inputs), sharp);
  loss.backward();
  optimizer.step();
  return loss.item<double>();
}

double ToyDeblurModel::finetune_step(std::span<const adapt::PseudoPair* const> batch) {
  if (!optimizer_ || !rng_) throw InvalidInput("toy deblur: finetune_step before start_finetune");
  if (batch.empty()) throw InvalidInput("toy deblur: empty batch");
  std::vector<torch::Tensor> inputs;
  std::vector<torch::Tensor> targets;
  for (const auto* pair : batch) {
    Frame sharp = as_rgb(pair->sharp);
    Frame blurred = as_rgb(pair->blurred);
    const int crop_size = config_.finetune_crop;
    if (crop_size > 0 && crop_size < sharp.height() && crop_size < sharp.width()) {
      const int top = static_cast<int>(rng_->next() % static_cast<std::uint64_t>(sharp.height() - crop_size + 1));
      const int left = static_cast<int>(rng_->next() % static_cast<std::uint64_t>(sharp.width() - crop_size + 1));
      const Window w{top, left, crop_size, crop_size};
      sharp = crop(sharp, w);
      blurred = crop(blurred, w);
    }
    const auto b = to_tensor(blurred);
    // A single generated frame stands in for every frame of the window.
    inputs.push_back(b.repeat({config_.window, 1, 1}));
    targets.push_back(to_tensor(sharp));
  }
  const Shape first = {static_cast<int>(targets.front().size(1)), static_cast<int>(targets.front().size(2))};
  for (const auto& t : targets) {
    if (t.size(1) != first.height || t.size(2) != first.width) throw InvalidInput("toy deblur: mixed patch sizes");
  }
  auto x = pad_to_multiple(torch::stack(inputs), 4);
  auto y = pad_to_multiple(torch::stack(targets), 4);
  return train_step(*optimizer_, x, y);
}

std::unique_ptr<adapt::DeblurringModel> ToyDeblurModel::clone() const {
  auto copy = std::make_unique<ToyDeblurModel>(config_, 0);
  torch::NoGradGuard no_grad;
  auto src = net_->named_parameters();
  auto dst = copy->net_->named_parameters();
  for (const auto& item : src) dst[item.key()].copy_(item.value());
  auto src_buffers = net_->named_buffers();
  auto dst_buffers = copy->net_->named_buffers();
  for (const auto& item : src_buffers) dst_buffers[item.key()].copy_(item.value());
  return copy;
}

std::uint64_t ToyDeblurModel::parameter_checksum() const { return nn::parameter_checksum(*net_); }

void ToyDeblurModel::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  torch::serialize::OutputArchive archive;
  net_->save(archive);
  const nlohmann::json meta = {{"model", name()}, {"config", config_.to_json()}};
  archive.write(kMetaKey, c10::IValue(meta.dump()));
  archive.save_to(path.string());
}

ToyDeblurModel ToyDeblurModel::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw LoadError("deblurring checkpoint not found: " + path.string());
  try {
    torch::serialize::InputArchive archive;
    archive.load_from(path.string());
    c10::IValue meta_value;
    if (!archive.try_read(kMetaKey, meta_value)) throw LoadError("checkpoint without metadata: " + path.string());
    const auto meta = nlohmann::json::parse(meta_value.toStringRef());
    ToyDeblurModel model(ToyDeblurConfig::from_json(meta.at("config")), 0);
    model.net_->load(archive);
    return model;
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError("cannot load deblurring checkpoint " + path.string() + ": " + e.what());
  }
}

std::vector<double> train_on_videos(ToyDeblurModel& model, std::span<const adapt::EvalVideo> videos,
                                    const SourceTrainOptions& options) {
  if (videos.empty()) throw InvalidInput("train_on_videos: no videos");
  if (options.steps < 0 || options.batch_size < 1 || options.crop < 4) {
    throw InvalidInput("train_on_videos: invalid steps, batch size or crop");
  }
  for (const auto& v : videos) {
    if (v.blurred.size() != v.sharp.size() || v.blurred.empty()) {
      throw InvalidInput("train_on_videos: video " + v.id + " has misaligned frames");
    }
    if (v.blurred.front().height() < options.crop || v.blurred.front().width() < options.crop) {
      throw InvalidInput("train_on_videos: video " + v.id + " smaller than the crop");
    }
  }
  torch::optim::Adam optimizer(model.net()->parameters(), torch::optim::AdamOptions(options.lr));
  synth::SplitMix64 rng(options.seed ^ 0x50C0DE5Eull);
  std::vector<double> losses;
  const int window = model.window_frames();
  for (int step = 0; step < options.steps; ++step) {
    std::vector<torch::Tensor> inputs;
    std::vector<torch::Tensor> targets;
    for (int b = 0; b < options.batch_size; ++b) {
      const auto& v = videos[rng.next() % videos.size()];
      const int t = static_cast<int>(rng.next() % v.blurred.size());
      const Shape s = v.blurred.front().shape();
      const int top = static_cast<int>(rng.next() % static_cast<std::uint64_t>(s.height - options.crop + 1));
      const int left = static_cast<int>(rng.next() % static_cast<std::uint64_t>(s.width - options.crop + 1));
      const Window w{top, left, options.crop, options.crop};
      std::vector<Frame> frames;
      for (const auto& f : adapt::temporal_window(v.blurred, t, window)) frames.push_back(crop(f, w));
      inputs.push_back(window_tensor(frames));
      targets.push_back(to_tensor(as_rgb(crop(v.sharp[static_cast<std::size_t>(t)], w))));
    }
    losses.push_back(model.train_step(optimizer, pad_to_multiple(torch::stack(inputs), 4),
                                      pad_to_multiple(torch::stack(targets), 4)));
  }
  return losses;
}

}  // namespace ttdeblur::nn
