#include "ttdeblur/nn/tensor.hpp"

#include "ttdeblur/error.hpp"
#include "ttdeblur/hash.hpp"

namespace ttdeblur::nn {

torch::Tensor to_tensor(const Frame& frame) {
  auto t = torch::empty({frame.channels(), frame.height(), frame.width()}, torch::kFloat32);
  std::copy(frame.values().begin(), frame.values().end(), t.data_ptr<float>());
  return t;
}

torch::Tensor to_tensor(const Plane& plane) {
  auto t = torch::empty({plane.height(), plane.width()}, torch::kFloat32);
  std::copy(plane.values().begin(), plane.values().end(), t.data_ptr<float>());
  return t;
}

torch::Tensor stack_frames(std::span<const Frame> frames) {
  std::vector<torch::Tensor> ts;
  ts.reserve(frames.size());
  for (const auto& f : frames) ts.push_back(to_tensor(f));
  return torch::stack(ts);
}

Frame to_frame(const torch::Tensor& t) {
  auto c = t.detach().to(torch::kFloat32).contiguous();
  if (c.dim() == 4 && c.size(0) == 1) c = c.squeeze(0);
  if (c.dim() != 3) throw InvalidInput("to_frame: expected [C, H, W]");
  Frame out(static_cast<int>(c.size(0)), static_cast<int>(c.size(1)), static_cast<int>(c.size(2)));
  std::copy(c.data_ptr<float>(), c.data_ptr<float>() + c.numel(), out.data());
  return out;
}

Plane to_plane(const torch::Tensor& t) {
  auto c = t.detach().to(torch::kFloat32).contiguous();
  while (c.dim() > 2 && c.size(0) == 1) c = c.squeeze(0);
  if (c.dim() != 2) throw InvalidInput("to_plane: expected [H, W]");
  Plane out(static_cast<int>(c.size(0)), static_cast<int>(c.size(1)));
  std::copy(c.data_ptr<float>(), c.data_ptr<float>() + c.numel(), out.data());
  return out;
}

Frame as_rgb(const Frame& frame) {
  if (frame.channels() == 3) return frame;
  const Plane p = frame.plane(0);
  return Frame::from_planes({p, p, p});
}

torch::Tensor pad_to_multiple(const torch::Tensor& x, int multiple) {
  const auto h = x.size(2);
  const auto w = x.size(3);
  const auto ph = (multiple - h % multiple) % multiple;
  const auto pw = (multiple - w % multiple) % multiple;
  if (ph == 0 && pw == 0) return x;
  namespace F = torch::nn::functional;
  F::PadFuncOptions options({0, pw, 0, ph});
  if (ph < h && pw < w) {
    options.mode(torch::kReflect);
  } else {
    options.mode(torch::kReplicate);
  }
  return F::pad(x, options);
}

std::uint64_t parameter_checksum(const torch::nn::Module& module) {
  std::uint64_t h = kFnvOffset;
  for (const auto& item : module.named_parameters()) {
    h = fnv1a(item.key(), h);
    auto t = item.value().detach().contiguous().to(torch::kCPU);
    h = fnv1a(std::span<const std::uint8_t>(static_cast<const std::uint8_t*>(t.data_ptr()),
                                            static_cast<std::size_t>(t.numel() * t.element_size())),
              h);
  }
  return h;
}

}  // namespace ttdeblur::nn
