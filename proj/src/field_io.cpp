#include "ttdeblur/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "ttdeblur/error.hpp"

namespace ttdeblur::io {

namespace {

constexpr char kFloMagic[4] = {'P', 'I', 'E', 'H'};
constexpr char kBcfMagic[4] = {'B', 'C', 'F', '1'};
constexpr char kPlaneMagic[4] = {'P', 'L', 'N', '1'};

class ByteWriter {
 public:
  void raw(const char (&magic)[4]) { out_.insert(out_.end(), magic, magic + 4); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, const char* format) : bytes_(bytes), format_(format) {}

  bool magic(const char (&expected)[4]) {
    need(4);
    const bool ok = std::memcmp(bytes_.data() + pos_, expected, 4) == 0;
    pos_ += 4;
    return ok;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw LoadError(std::string(format_) + ": truncated data");
  }

  const std::vector<std::uint8_t>& bytes_;
  const char* format_;
  std::size_t pos_ = 0;
};

void check_dims(std::uint64_t h, std::uint64_t w, const char* format) {
  constexpr std::uint64_t kMaxSide = 1u << 16;
  if (h == 0 || w == 0 || h > kMaxSide || w > kMaxSide) {
    throw LoadError(std::string(format) + ": implausible dimensions " + std::to_string(h) + "x" + std::to_string(w));
  }
}

}  // namespace

std::vector<std::uint8_t> encode_flo(const FlowField& flow) {
  require_same_shape(flow.u.shape(), flow.v.shape(), "encode_flo");
  ByteWriter w;
  w.raw(kFloMagic);
  w.u32(static_cast<std::uint32_t>(flow.u.width()));
  w.u32(static_cast<std::uint32_t>(flow.u.height()));
  auto u = flow.u.values();
  auto v = flow.v.values();
  for (std::size_t i = 0; i < u.size(); ++i) {
    w.f32(u[i]);
    w.f32(v[i]);
  }
  return w.take();
}

FlowField decode_flo(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, ".flo");
  if (!r.magic(kFloMagic)) throw LoadError(".flo: bad magic (expected PIEH)");
  const std::uint32_t width = r.u32();
  const std::uint32_t height = r.u32();
  check_dims(height, width, ".flo");
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (r.remaining() != n * 8) throw LoadError(".flo: payload size does not match header");
  FlowField flow(Shape{static_cast<int>(height), static_cast<int>(width)}, 0.0f, 0.0f);
  auto u = flow.u.values();
  auto v = flow.v.values();
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = r.f32();
    v[i] = r.f32();
  }
  return flow;
}

std::vector<std::uint8_t> encode_bcf(const BlurConditionField& cond) {
  require_same_shape(cond.x.shape(), cond.y.shape(), "encode_bcf");
  require_same_shape(cond.x.shape(), cond.z.shape(), "encode_bcf");
  ByteWriter w;
  w.raw(kBcfMagic);
  w.u32(static_cast<std::uint32_t>(cond.x.height()));
  w.u32(static_cast<std::uint32_t>(cond.x.width()));
  w.u32(3);
  for (const Plane* p : {&cond.x, &cond.y, &cond.z}) {
    for (float v : p->values()) w.f32(v);
  }
  return w.take();
}

BlurConditionField decode_bcf(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "BCF1");
  if (!r.magic(kBcfMagic)) throw LoadError("BCF1: bad magic");
  const std::uint32_t height = r.u32();
  const std::uint32_t width = r.u32();
  const std::uint32_t channels = r.u32();
  check_dims(height, width, "BCF1");
  if (channels != 3) throw LoadError("BCF1: expected 3 channels, got " + std::to_string(channels));
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (r.remaining() != n * 12) throw LoadError("BCF1: payload size does not match header");
  const Shape shape{static_cast<int>(height), static_cast<int>(width)};
  BlurConditionField cond{Plane(shape), Plane(shape), Plane(shape)};
  for (Plane* p : {&cond.x, &cond.y, &cond.z}) {
    for (float& v : p->values()) v = r.f32();
  }
  return cond;
}

std::vector<std::uint8_t> encode_plane(const Plane& plane) {
  ByteWriter w;
  w.raw(kPlaneMagic);
  w.u32(static_cast<std::uint32_t>(plane.height()));
  w.u32(static_cast<std::uint32_t>(plane.width()));
  for (float v : plane.values()) w.f32(v);
  return w.take();
}

Plane decode_plane(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "PLN1");
  if (!r.magic(kPlaneMagic)) throw LoadError("PLN1: bad magic");
  const std::uint32_t height = r.u32();
  const std::uint32_t width = r.u32();
  check_dims(height, width, "PLN1");
  if (r.remaining() != static_cast<std::size_t>(height) * width * 4) {
    throw LoadError("PLN1: payload size does not match header");
  }
  Plane plane(static_cast<int>(height), static_cast<int>(width));
  for (float& v : plane.values()) v = r.f32();
  return plane;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw LoadError("short write to " + path.string());
}

void write_flo(const std::filesystem::path& path, const FlowField& flow) { write_file_bytes(path, encode_flo(flow)); }

FlowField read_flo(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_flo(bytes);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void write_bcf(const std::filesystem::path& path, const BlurConditionField& cond) {
  write_file_bytes(path, encode_bcf(cond));
}

BlurConditionField read_bcf(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_bcf(bytes);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void write_plane(const std::filesystem::path& path, const Plane& plane) {
  write_file_bytes(path, encode_plane(plane));
}

Plane read_plane(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_plane(bytes);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

}  // namespace ttdeblur::io
