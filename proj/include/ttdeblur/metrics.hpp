#pragma once

#include "ttdeblur/grid.hpp"

namespace ttdeblur::metrics {

double mse(const Frame& a, const Frame& b);

/// 10 log10(1 / MSE) on [0, 1] intensities; +infinity for identical frames.
double psnr(const Frame& a, const Frame& b);

/// Mean SSIM over the valid region of an 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, data range 1; computed per channel and averaged.
double ssim(const Frame& a, const Frame& b);

}  // namespace ttdeblur::metrics
