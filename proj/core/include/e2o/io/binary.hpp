#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "e2o/errors.hpp"

namespace e2o::io {

/// Appends little-endian encoded scalars to a growable byte buffer.
class BinaryWriter {
 public:
  void magic(std::string_view tag) { bytes_.insert(bytes_.end(), tag.begin(), tag.end()); }

  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }

  void f32_array(std::span<const float> values) {
    for (float v : values) f32(v);
  }

  /// Length-prefixed (u64) opaque blob.
  void blob(std::span<const std::uint8_t> data) {
    u64(data.size());
    bytes_.insert(bytes_.end(), data.begin(), data.end());
  }

  const std::vector<std::uint8_t>& bytes() const& { return bytes_; }
  std::vector<std::uint8_t> bytes() && { return std::move(bytes_); }

 private:
  template <typename U>
  void put_le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked little-endian reader; every overrun raises FormatError.
class BinaryReader {
 public:
  explicit BinaryReader(std::span<const std::uint8_t> data) : data_(data) {}

  void expect_magic(std::string_view tag) {
    auto got = take(tag.size());
    if (!std::equal(tag.begin(), tag.end(), got.begin())) {
      throw FormatError("bad magic: expected '" + std::string(tag) + "'");
    }
  }

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }

  void f32_array(std::span<float> out) {
    for (float& v : out) v = f32();
  }

  std::span<const std::uint8_t> blob() {
    const std::uint64_t n = u64();
    if (n > remaining()) throw FormatError("truncated blob");
    return take(static_cast<std::size_t>(n));
  }

  std::size_t remaining() const { return data_.size() - pos_; }

  void expect_end() const {
    if (remaining() != 0) throw FormatError("trailing bytes after payload");
  }

 private:
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) throw FormatError("unexpected end of data");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename U>
  U get_le() {
    auto b = take(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace e2o::io
