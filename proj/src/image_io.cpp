#include "ttdeblur/image_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>

#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "ttdeblur/error.hpp"

namespace fs = std::filesystem;

namespace ttdeblur::io {

Frame read_png(const fs::path& path) {
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_ANYDEPTH | cv::IMREAD_ANYCOLOR);
  if (img.empty()) throw LoadError("cannot read image " + path.string());
  double scale = 1.0;
  switch (img.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    default: throw LoadError("unsupported PNG bit depth in " + path.string());
  }
  if (img.channels() == 4) img = cv::imread(path.string(), cv::IMREAD_ANYDEPTH | cv::IMREAD_COLOR);  // drop alpha
  const int channels = img.channels() == 1 ? 1 : 3;
  cv::Mat f;
  img.convertTo(f, channels == 1 ? CV_32FC1 : CV_32FC3, scale);

  Frame frame(channels, f.rows, f.cols);
  for (int y = 0; y < f.rows; ++y) {
    const float* row = f.ptr<float>(y);
    for (int x = 0; x < f.cols; ++x) {
      if (channels == 1) {
        frame.at(0, y, x) = row[x];
      } else {
        // OpenCV stores BGR.
        frame.at(0, y, x) = row[3 * x + 2];
        frame.at(1, y, x) = row[3 * x + 1];
        frame.at(2, y, x) = row[3 * x + 0];
      }
    }
  }
  return frame;
}

void write_png(const fs::path& path, const Frame& frame, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw InvalidInput("write_png: bit depth must be 8 or 16");
  const double peak = bit_depth == 8 ? 255.0 : 65535.0;
  const int type = bit_depth == 8 ? (frame.channels() == 1 ? CV_8UC1 : CV_8UC3)
                                  : (frame.channels() == 1 ? CV_16UC1 : CV_16UC3);
  cv::Mat out(frame.height(), frame.width(), type);
  auto quantize = [peak](float v) {
    return static_cast<int>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * peak));
  };
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      for (int c = 0; c < frame.channels(); ++c) {
        // RGB planes -> BGR interleaved.
        const int dst_c = frame.channels() == 1 ? 0 : 2 - c;
        const int q = quantize(frame.at(c, y, x));
        if (bit_depth == 8) {
          out.ptr<std::uint8_t>(y)[frame.channels() * x + dst_c] = static_cast<std::uint8_t>(q);
        } else {
          out.ptr<std::uint16_t>(y)[frame.channels() * x + dst_c] = static_cast<std::uint16_t>(q);
        }
      }
    }
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), out)) throw LoadError("cannot write image " + path.string());
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.png", index);
  return buf;
}

std::vector<fs::path> list_frames(const fs::path& video_dir) {
  if (!fs::is_directory(video_dir)) throw LoadError("video directory not found: " + video_dir.string());

  const fs::path manifest = video_dir / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(manifest.string() + ": " + e.what());
    }
    std::vector<fs::path> frames;
    for (const auto& name : j.at("frames")) frames.push_back(video_dir / name.get<std::string>());
    for (const auto& p : frames) {
      if (!fs::exists(p)) throw LoadError("manifest lists missing frame " + p.string());
    }
    return frames;
  }

  static const std::regex pattern(R"(frame_(\d+)\.png)");
  std::vector<std::pair<long, fs::path>> indexed;
  for (const auto& entry : fs::directory_iterator(video_dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(name, m, pattern)) {
      indexed.emplace_back(std::stol(m[1].str()), entry.path());
    }
  }
  std::sort(indexed.begin(), indexed.end());
  std::vector<fs::path> frames;
  frames.reserve(indexed.size());
  for (auto& [idx, p] : indexed) frames.push_back(std::move(p));
  return frames;
}

std::vector<std::string> list_videos(const fs::path& root) {
  if (!fs::is_directory(root)) throw LoadError("directory not found: " + root.string());
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::vector<Frame> read_video(const fs::path& video_dir) {
  std::vector<Frame> frames;
  for (const auto& p : list_frames(video_dir)) frames.push_back(read_png(p));
  return frames;
}

}  // namespace ttdeblur::io
