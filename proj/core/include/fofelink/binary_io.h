#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace fofelink {

// Little-endian byte sink used by the KB index and model file formats.
class BinaryWriter {
 public:
  void write_bytes(std::string_view bytes) { buffer_.append(bytes); }
  void write_u8(std::uint8_t v) { buffer_.push_back(static_cast<char>(v)); }
  void write_u16(std::uint16_t v) { write_le(v, 2); }
  void write_u32(std::uint32_t v) { write_le(v, 4); }
  void write_u64(std::uint64_t v) { write_le(v, 8); }
  void write_f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    write_u32(bits);
  }
  void write_f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    write_u64(bits);
  }
  // u32 length prefix, then raw UTF-8 bytes.
  void write_string(std::string_view s) {
    write_u32(static_cast<std::uint32_t>(s.size()));
    write_bytes(s);
  }

  // Tagged section: 4-byte tag, u64 payload length, payload.
  void write_section(std::string_view tag, const BinaryWriter& payload);

  const std::string& data() const { return buffer_; }
  std::size_t size() const { return buffer_.size(); }

 private:
  void write_le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) {
      buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
  }

  std::string buffer_;
};

// Bounds-checked reader over an in-memory buffer. Every read past the end
// throws ValidationError.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::string_view read_bytes(std::size_t n);
  std::uint8_t read_u8() { return static_cast<std::uint8_t>(read_le(1)); }
  std::uint16_t read_u16() { return static_cast<std::uint16_t>(read_le(2)); }
  std::uint32_t read_u32() { return static_cast<std::uint32_t>(read_le(4)); }
  std::uint64_t read_u64() { return read_le(8); }
  float read_f32() {
    const std::uint32_t bits = read_u32();
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  double read_f64() {
    const std::uint64_t bits = read_u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string read_string() {
    const std::uint32_t n = read_u32();
    return std::string(read_bytes(n));
  }

  struct Section {
    std::string tag;
    std::string_view payload;
  };
  Section read_section();

  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::uint64_t read_le(int bytes);

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace fofelink
