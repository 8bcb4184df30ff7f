#include "ttdeblur/nn/neural_backends.hpp"

#include <random>

#include "ttdeblur/adapt.hpp"
#include "ttdeblur/error.hpp"
#include "ttdeblur/hash.hpp"
#include "ttdeblur/nn/tensor.hpp"

namespace fs = std::filesystem;
using torch::indexing::Slice;

namespace ttdeblur::nn {

namespace {

torch::jit::Module load_script(const fs::path& path, const char* what) {
  if (!fs::exists(path)) throw LoadError(std::string(what) + " checkpoint not found: " + path.string());
  try {
    auto module = torch::jit::load(path.string(), torch::kCPU);
    module.eval();
    return module;
  } catch (const std::exception& e) {
    throw LoadError(std::string("cannot load ") + what + " checkpoint " + path.string() + ": " + e.what());
  }
}

void require_forward_arity(const torch::jit::Module& module, std::size_t inputs, const fs::path& path,
                           const char* what) {
  auto method = module.find_method("forward");
  if (!method) throw LoadError(std::string(what) + " checkpoint has no forward method: " + path.string());
  const auto& args = method->function().getSchema().arguments();
  if (args.size() != inputs + 1) {
    throw LoadError(std::string(what) + " checkpoint " + path.string() + ": forward takes " +
                    std::to_string(args.size() - 1) + " inputs, expected " + std::to_string(inputs));
  }
}

torch::Tensor frame_batch(const Frame& f) { return to_tensor(as_rgb(f)).unsqueeze(0); }

}  // namespace

nlohmann::json RaftOptions::to_json() const { return {{"input_scale", input_scale}}; }

RaftOptions RaftOptions::from_json(const nlohmann::json& j) {
  RaftOptions o;
  o.input_scale = j.value("input_scale", o.input_scale);
  if (!(o.input_scale > 0.0)) throw InvalidInput("raft: input_scale must be positive");
  return o;
}

RaftFlowEstimator::RaftFlowEstimator(torch::jit::Module module, RaftOptions options, fs::path path)
    : module_(std::move(module)), options_(options), path_(std::move(path)) {}

FlowField RaftFlowEstimator::estimate(const Frame& a, const Frame& b, const FramePairId& id) const {
  require_same_shape(a.shape(), b.shape(), "raft estimate");
  const Shape shape = a.shape();
  torch::NoGradGuard no_grad;
  auto x1 = pad_to_multiple(frame_batch(a), 8) * options_.input_scale;
  auto x2 = pad_to_multiple(frame_batch(b), 8) * options_.input_scale;
  torch::jit::IValue out;
  try {
    std::lock_guard lock(mutex_);
    out = module_.forward({x1, x2});
  } catch (const std::exception& e) {
    throw StageError("flow", "raft " + path_.string() + " failed on " + id.video + " " + std::to_string(id.from) +
                                 "->" + std::to_string(id.to) + ": " + e.what());
  }
  torch::Tensor flow;
  if (out.isTensor()) {
    flow = out.toTensor();
  } else if (out.isList() && !out.toList().empty()) {
    flow = out.toList().get(out.toList().size() - 1).toTensor();
  } else if (out.isTuple() && !out.toTuple()->elements().empty()) {
    flow = out.toTuple()->elements().back().toTensor();
  } else {
    throw StageError("flow", "raft " + path_.string() + ": unsupported output type");
  }
  if (flow.dim() != 4 || flow.size(1) != 2) throw StageError("flow", "raft " + path_.string() + ": expected [1, 2, H, W]");
  flow = flow.index({0, Slice(), Slice(0, shape.height), Slice(0, shape.width)}).to(torch::kFloat32).contiguous();
  FlowField f{to_plane(flow[0]), to_plane(flow[1])};
  return f;
}

std::unique_ptr<RaftFlowEstimator> raft_adapter_load(const fs::path& checkpoint, RaftOptions options) {
  auto module = load_script(checkpoint, "flow");
  require_forward_arity(module, 2, checkpoint, "flow");
  return std::make_unique<RaftFlowEstimator>(std::move(module), options, checkpoint);
}

void DiffusionSamplerConfig::validate() const {
  if (train_steps < 1 || sample_steps < 1 || sample_steps > train_steps) {
    throw InvalidInput("diffusion sampler: need 1 <= sample_steps <= train_steps");
  }
  if (!(beta_start > 0.0) || !(beta_end >= beta_start) || !(beta_end < 1.0)) {
    throw InvalidInput("diffusion sampler: need 0 < beta_start <= beta_end < 1");
  }
}

nlohmann::json DiffusionSamplerConfig::to_json() const {
  nlohmann::json j = {{"train_steps", train_steps},
                      {"beta_start", beta_start},
                      {"beta_end", beta_end},
                      {"sample_steps", sample_steps}};
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  return j;
}

DiffusionSamplerConfig DiffusionSamplerConfig::from_json(const nlohmann::json& j) {
  DiffusionSamplerConfig c;
  c.train_steps = j.value("train_steps", c.train_steps);
  c.beta_start = j.value("beta_start", c.beta_start);
  c.beta_end = j.value("beta_end", c.beta_end);
  c.sample_steps = j.value("sample_steps", c.sample_steps);
  if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

IdBlauBlurringModel::IdBlauBlurringModel(torch::jit::Module module, DiffusionSamplerConfig config, fs::path path)
    : module_(std::move(module)), config_(std::move(config)), path_(std::move(path)) {
  config_.validate();
  const auto betas = torch::linspace(config_.beta_start, config_.beta_end, config_.train_steps, torch::kFloat64);
  alpha_bar_ = torch::cumprod(1.0 - betas, 0);
}

std::vector<int> IdBlauBlurringModel::timesteps() const {
  std::vector<int> ts;
  const int stride = config_.train_steps / config_.sample_steps;
  for (int i = config_.sample_steps - 1; i >= 0; --i) ts.push_back(i * stride);
  return ts;
}

Frame IdBlauBlurringModel::blur(const Frame& sharp, const BlurConditionField& cond) const {
  require_same_shape(sharp.shape(), cond.x.shape(), "idblau blur");
  require_same_shape(sharp.shape(), cond.z.shape(), "idblau blur");
  const Shape shape = sharp.shape();
  torch::NoGradGuard no_grad;

  std::uint64_t seed = 0;
  if (config_.seed) {
    seed = adapt::checksum(sharp, *config_.seed);
    for (const Plane* p : {&cond.x, &cond.y, &cond.z}) {
      const auto bytes = std::as_bytes(p->values());
      seed = fnv1a({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()}, seed);
    }
  } else {
    seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
  }
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);

  auto s = pad_to_multiple(frame_batch(sharp), 8) * 2.0 - 1.0;
  auto c = pad_to_multiple(torch::stack({to_tensor(cond.x), to_tensor(cond.y), to_tensor(cond.z)}).unsqueeze(0), 8);
  auto x = at::randn(s.sizes(), gen, torch::kFloat32);

  const auto ts = timesteps();
  const auto ab = alpha_bar_.accessor<double, 1>();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const int t = ts[i];
    const double a_t = ab[t];
    const double a_prev = i + 1 < ts.size() ? ab[ts[i + 1]] : 1.0;
    torch::Tensor eps;
    try {
      std::lock_guard lock(mutex_);
      eps = module_.forward({x, s, c, torch::full({1}, t, torch::kInt64)}).toTensor().to(torch::kFloat32);
    } catch (const std::exception& e) {
      throw StageError("blur", "idblau " + path_.string() + " failed at t=" + std::to_string(t) + ": " + e.what());
    }
    if (eps.sizes() != x.sizes()) throw StageError("blur", "idblau " + path_.string() + ": noise prediction shape mismatch");
    auto x0 = ((x - std::sqrt(1.0 - a_t) * eps) / std::sqrt(a_t)).clamp(-1.0, 1.0);
    x = std::sqrt(a_prev) * x0 + std::sqrt(1.0 - a_prev) * eps;
  }
  auto y = ((x + 1.0) * 0.5).index({0, Slice(), Slice(0, shape.height), Slice(0, shape.width)});
  Frame out = to_frame(y.contiguous());
  if (sharp.channels() == 1) {
    Frame gray(1, shape);
    for (int r = 0; r < shape.height; ++r) {
      for (int q = 0; q < shape.width; ++q) gray.at(0, r, q) = (out.at(0, r, q) + out.at(1, r, q) + out.at(2, r, q)) / 3.0f;
    }
    out = std::move(gray);
  }
  out.clamp01();
  return out;
}

std::unique_ptr<IdBlauBlurringModel> idblau_adapter_load(const fs::path& checkpoint, DiffusionSamplerConfig config) {
  auto module = load_script(checkpoint, "blurring");
  require_forward_arity(module, 4, checkpoint, "blurring");
  return std::make_unique<IdBlauBlurringModel>(std::move(module), std::move(config), checkpoint);
}

}  // namespace ttdeblur::nn
