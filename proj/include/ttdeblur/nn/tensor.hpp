#pragma once

#include <span>

#include <torch/torch.h>

#include "ttdeblur/fields.hpp"
#include "ttdeblur/grid.hpp"

namespace ttdeblur::nn {

/// [C, H, W] float32 copy of a frame.
torch::Tensor to_tensor(const Frame& frame);
/// [H, W] float32 copy of a plane.
torch::Tensor to_tensor(const Plane& plane);
/// [N, C, H, W] stack of same-shaped frames.
torch::Tensor stack_frames(std::span<const Frame> frames);

/// Accepts [C, H, W] or [1, C, H, W].
Frame to_frame(const torch::Tensor& t);
/// Accepts [H, W], [1, H, W] or [1, 1, H, W].
Plane to_plane(const torch::Tensor& t);

/// Frames must be 3-channel for the networks; gray frames are replicated.
Frame as_rgb(const Frame& frame);

/// Pads [N, C, H, W] on the bottom/right to multiples of `multiple`,
/// reflecting where the input is large enough and replicating otherwise.
torch::Tensor pad_to_multiple(const torch::Tensor& x, int multiple);

/// Copies every parameter and buffer into a flat byte hash.
std::uint64_t parameter_checksum(const torch::nn::Module& module);

}  // namespace ttdeblur::nn
