#include "fofelink/binary_io.h"

#include <fstream>
#include <sstream>

#include "fofelink/errors.h"

namespace fofelink {

void BinaryWriter::write_section(std::string_view tag,
                                 const BinaryWriter& payload) {
  std::array<char, 4> padded{' ', ' ', ' ', ' '};
  std::memcpy(padded.data(), tag.data(), std::min<std::size_t>(4, tag.size()));
  write_bytes(std::string_view(padded.data(), padded.size()));
  write_u64(payload.size());
  write_bytes(payload.data());
}

std::string_view BinaryReader::read_bytes(std::size_t n) {
  if (n > remaining()) {
    throw ValidationError("truncated binary data: need " + std::to_string(n) +
                          " bytes at offset " + std::to_string(pos_) +
                          ", have " + std::to_string(remaining()));
  }
  std::string_view out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint64_t BinaryReader::read_le(int bytes) {
  const std::string_view raw = read_bytes(static_cast<std::size_t>(bytes));
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i]))
         << (8 * i);
  }
  return v;
}

BinaryReader::Section BinaryReader::read_section() {
  Section section;
  std::string_view tag = read_bytes(4);
  while (!tag.empty() && tag.back() == ' ') tag.remove_suffix(1);
  section.tag = std::string(tag);
  const std::uint64_t n = read_u64();
  section.payload = read_bytes(static_cast<std::size_t>(n));
  return section;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace fofelink
