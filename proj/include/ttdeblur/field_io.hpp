#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ttdeblur/fields.hpp"

namespace ttdeblur::io {

// Middlebury .flo: "PIEH", int32 width, int32 height, interleaved float32 (u, v),
// all little-endian.
std::vector<std::uint8_t> encode_flo(const FlowField& flow);
FlowField decode_flo(const std::vector<std::uint8_t>& bytes);
void write_flo(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flo(const std::filesystem::path& path);

// "BCF1" condition files: magic, u32 height, u32 width, u32 channels (= 3),
// then row-major float32 planes x, y, z, all little-endian.
std::vector<std::uint8_t> encode_bcf(const BlurConditionField& cond);
BlurConditionField decode_bcf(const std::vector<std::uint8_t>& bytes);
void write_bcf(const std::filesystem::path& path, const BlurConditionField& cond);
BlurConditionField read_bcf(const std::filesystem::path& path);

// "PLN1" single float plane: magic, u32 height, u32 width, row-major float32.
std::vector<std::uint8_t> encode_plane(const Plane& plane);
Plane decode_plane(const std::vector<std::uint8_t>& bytes);
void write_plane(const std::filesystem::path& path, const Plane& plane);
Plane read_plane(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
/// Writes atomically enough for the pipeline: parent directories are created.
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace ttdeblur::io
