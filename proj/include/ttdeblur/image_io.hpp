#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ttdeblur/grid.hpp"

namespace ttdeblur::io {

/// Reads an 8- or 16-bit PNG (gray or color) into [0, 1] floats, RGB order.
Frame read_png(const std::filesystem::path& path);

/// Writes a clamped [0, 1] frame as PNG. `bit_depth` is 8 or 16.
void write_png(const std::filesystem::path& path, const Frame& frame, int bit_depth = 16);

/// "frame_000042.png" for index 42.
std::string frame_filename(int index);

/// Frames of a video directory ordered by their numeric index, or by the
/// "frames" list of an optional manifest.json in that directory.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& video_dir);

/// Immediate subdirectories of `root`, sorted by name.
std::vector<std::string> list_videos(const std::filesystem::path& root);

std::vector<Frame> read_video(const std::filesystem::path& video_dir);

}  // namespace ttdeblur::io
