#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kbz {

/// Whole-file read; throws io_error on failure.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames over the target, so a failed
/// run never leaves a partial output file.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& text);

// Little-endian scalar encoding, independent of host byte order.
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_f32(std::vector<std::uint8_t>& out, float v);

/// Cursor over an immutable byte buffer; throws decode_error with the
/// current offset when reads run past the end.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  void magic(const char expected[4]);
  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

/// Floats rendered with 17 significant digits (round-trip exact).
std::string format_g17(double v);

}  // namespace kbz
