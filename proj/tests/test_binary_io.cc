#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "fofelink/binary_io.h"
#include "fofelink/errors.h"

namespace fofelink {
namespace {

TEST(BinaryIo, LittleEndianLayout) {
  BinaryWriter w;
  w.write_u16(0x0102);
  w.write_u32(0x03040506);
  EXPECT_EQ(w.data(), std::string("\x02\x01\x06\x05\x04\x03", 6));
}

TEST(BinaryIo, RoundTripsEveryType) {
  BinaryWriter w;
  w.write_u8(7);
  w.write_u16(65535);
  w.write_u32(123456789);
  w.write_u64(std::numeric_limits<std::uint64_t>::max());
  w.write_f32(-1.5f);
  w.write_f64(std::nextafter(1.0, 2.0));
  w.write_string("héllo");
  BinaryReader r(w.data());
  EXPECT_EQ(r.read_u8(), 7);
  EXPECT_EQ(r.read_u16(), 65535);
  EXPECT_EQ(r.read_u32(), 123456789u);
  EXPECT_EQ(r.read_u64(), std::numeric_limits<std::uint64_t>::max());
  EXPECT_EQ(r.read_f32(), -1.5f);
  EXPECT_EQ(r.read_f64(), std::nextafter(1.0, 2.0));
  EXPECT_EQ(r.read_string(), "héllo");
  EXPECT_TRUE(r.at_end());
}

TEST(BinaryIo, Sections) {
  BinaryWriter payload;
  payload.write_u32(42);
  BinaryWriter w;
  w.write_section("ABCD", payload);
  BinaryReader r(w.data());
  const auto s = r.read_section();
  EXPECT_EQ(s.tag, "ABCD");
  EXPECT_EQ(BinaryReader(s.payload).read_u32(), 42u);
  EXPECT_TRUE(r.at_end());
}

TEST(BinaryIo, ReadsPastEndThrow) {
  BinaryReader r(std::string_view("\x01\x02", 2));
  EXPECT_THROW(r.read_u32(), ValidationError);
  BinaryWriter w;
  w.write_u32(100);
  BinaryReader s(w.data());
  EXPECT_THROW(s.read_string(), ValidationError);
  BinaryWriter sec;
  sec.write_bytes("TAG!");
  sec.write_u64(1000);
  BinaryReader t(sec.data());
  EXPECT_THROW(t.read_section(), ValidationError);
}

TEST(BinaryIo, MissingFileIsIoError) {
  EXPECT_THROW(read_file(std::filesystem::temp_directory_path() / "fofelink_absent" / "file.bin"), IoError);
  const auto blocker = std::filesystem::temp_directory_path() / "fofelink_blocker";
  write_file(blocker, "x");
  EXPECT_THROW(write_file(blocker / "sub" / "file.bin", "x"), IoError);
}

}  // namespace
}  // namespace fofelink
