#include "ttdeblur/rsdm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "ttdeblur/error.hpp"

namespace ttdeblur::rsdm {

SummedAreaTable::SummedAreaTable(const Plane& values)
    : height_(values.height()),
      width_(values.width()),
      table_(static_cast<std::size_t>(height_ + 1) * static_cast<std::size_t>(width_ + 1), 0) {
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  for (int y = 0; y < height_; ++y) {
    std::int64_t row = 0;
    for (int x = 0; x < width_; ++x) {
      row += static_cast<std::int64_t>(std::llround(static_cast<double>(values(y, x)) * kScale));
      table_[(y + 1) * stride + (x + 1)] = table_[y * stride + (x + 1)] + row;
    }
  }
}

std::int64_t SummedAreaTable::sum_fixed(int top, int left, int h, int w) const {
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  const std::size_t y0 = top, x0 = left, y1 = top + h, x1 = left + w;
  return table_[y1 * stride + x1] - table_[y0 * stride + x1] - table_[y1 * stride + x0] + table_[y0 * stride + x0];
}

double SummedAreaTable::mean(int top, int left, int h, int w) const {
  return static_cast<double>(sum_fixed(top, left, h, w)) / (kScale * static_cast<double>(h) * w);
}

namespace {

std::vector<int> window_starts(int extent, int patch, int stride) {
  std::vector<int> starts;
  for (int s = 0; s <= extent - patch; s += stride) starts.push_back(s);
  if (starts.empty() || starts.back() != extent - patch) starts.push_back(extent - patch);
  return starts;
}

}  // namespace

std::optional<WindowScore> frame_sharpness_score(const BlurMagnitudeMap& mag, int patch, int stride) {
  if (patch <= 0 || stride <= 0) throw InvalidInput("frame_sharpness_score: patch and stride must be positive");
  if (mag.m.height() < patch || mag.m.width() < patch) return std::nullopt;

  const SummedAreaTable sat(mag.m);
  const auto tops = window_starts(mag.m.height(), patch, stride);
  const auto lefts = window_starts(mag.m.width(), patch, stride);
  std::int64_t best = 0;
  Window best_window{};
  bool found = false;
  // Row-major scan with a strict comparison keeps the lexicographically
  // smallest (top, left) among ties.
  for (int top : tops) {
    for (int left : lefts) {
      const std::int64_t s = sat.sum_fixed(top, left, patch, patch);
      if (!found || s < best) {
        best = s;
        best_window = Window{top, left, patch, patch};
        found = true;
      }
    }
  }
  return WindowScore{static_cast<double>(best) / (SummedAreaTable::kScale * patch * static_cast<double>(patch)),
                     best_window};
}

int selection_count(double ratio, int total) {
  if (!(ratio > 0.0 && ratio <= 100.0)) throw InvalidInput("ratio r must lie in (0, 100]");
  return static_cast<int>(std::ceil(ratio * total / 100.0 - 1e-9));
}

std::optional<Window> component_window(const BlurMagnitudeMap& mag, double eta, int patch) {
  const int h = mag.m.height();
  const int w = mag.m.width();
  if (h < patch || w < patch) return std::nullopt;
  std::vector<int> label(static_cast<std::size_t>(h) * w, -1);
  std::size_t best_area = 0;
  double best_cy = 0.0, best_cx = 0.0;
  int next_label = 0;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t i0 = static_cast<std::size_t>(y0) * w + x0;
      if (label[i0] >= 0 || mag.m(y0, x0) > eta) continue;
      std::size_t area = 0;
      double sy = 0.0, sx = 0.0;
      std::queue<std::pair<int, int>> q;
      q.emplace(y0, x0);
      label[i0] = next_label;
      while (!q.empty()) {
        auto [y, x] = q.front();
        q.pop();
        ++area;
        sy += y;
        sx += x;
        constexpr int dy[4] = {-1, 1, 0, 0};
        constexpr int dx[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int ny = y + dy[k], nx = x + dx[k];
          if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
          const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
          if (label[ni] >= 0 || mag.m(ny, nx) > eta) continue;
          label[ni] = next_label;
          q.emplace(ny, nx);
        }
      }
      if (area > best_area) {
        best_area = area;
        best_cy = sy / area;
        best_cx = sx / area;
      }
      ++next_label;
    }
  }
  if (best_area == 0) return std::nullopt;
  const int top = std::clamp(static_cast<int>(std::lround(best_cy - patch / 2.0)), 0, h - patch);
  const int left = std::clamp(static_cast<int>(std::lround(best_cx - patch / 2.0)), 0, w - patch);
  return Window{top, left, patch, patch};
}

SelectionReport select_pseudo_sharp(const std::string& video_id, std::span<const BlurMagnitudeMap> video_mags,
                                    const SelectionOptions& options) {
  const int total = static_cast<int>(video_mags.size());
  if (total < 1) throw InvalidInput("select_pseudo_sharp: empty video");
  const int wanted = selection_count(options.ratio, total);

  struct Scored {
    int frame;
    WindowScore ws;
  };
  std::vector<Scored> eligible;
  SelectionReport report;
  for (int t = 0; t < total; ++t) {
    const bool temporal_ok = t - kTemporalRadius >= 0 && t + kTemporalRadius < total;
    std::optional<WindowScore> ws;
    if (temporal_ok) ws = frame_sharpness_score(video_mags[static_cast<std::size_t>(t)], options.patch, options.stride);
    if (ws) {
      eligible.push_back({t, *ws});
    } else {
      report.ineligible_frames.push_back(t);
    }
  }
  if (eligible.empty()) {
    report.warnings.push_back("video " + video_id + ": no eligible frames");
    return report;
  }

  std::stable_sort(eligible.begin(), eligible.end(), [](const Scored& a, const Scored& b) {
    if (a.ws.score != b.ws.score) return a.ws.score < b.ws.score;
    return a.frame < b.frame;
  });

  const int n_eligible = static_cast<int>(eligible.size());
  int begin = 0;
  int end = std::min(wanted, n_eligible);
  if (options.ratio_range) {
    const auto [lo, hi] = *options.ratio_range;
    if (!(lo >= 0.0 && lo < hi && hi <= 100.0)) throw InvalidInput("ratio_range must satisfy 0 <= lo < hi <= 100");
    begin = lo == 0.0 ? 0 : std::min(selection_count(lo, total), n_eligible);
    end = std::min(selection_count(hi, total), n_eligible);
  }
  if (begin >= end) {
    report.warnings.push_back("video " + video_id + ": selection band is empty");
    return report;
  }

  report.eta_implied = eligible[static_cast<std::size_t>(end - 1)].ws.score;
  for (int i = begin; i < end; ++i) {
    const auto& s = eligible[static_cast<std::size_t>(i)];
    PatchSelection sel{video_id, s.frame, s.ws.window, s.ws.score, report.eta_implied};
    if (options.crop_mode == CropMode::connected_component) {
      const auto& mag = video_mags[static_cast<std::size_t>(s.frame)];
      if (auto w = component_window(mag, report.eta_implied, options.patch)) {
        sel.window = *w;
        sel.score = SummedAreaTable(mag.m).mean(w->top, w->left, w->height, w->width);
      }
    }
    report.selections.push_back(sel);
  }
  return report;
}

}  // namespace ttdeblur::rsdm
