#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kbz/codebook.hpp"

namespace kbz {

/// H x W grid of feature vectors in R^dim, row-major.
struct FeatureGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t dim = 0;
  std::vector<float> values;  // height * width * dim

  std::span<const float> cell(std::size_t h, std::size_t w) const {
    return {values.data() + (h * width + w) * dim, dim};
  }

  void validate() const;
};

/// H x W grid of codebook indices, each in [0, kb_size). Indices are
/// 0-based both in memory and on the wire.
struct IndexGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::uint64_t kb_size = 0;
  std::vector<std::uint64_t> indices;  // height * width, row-major

  void validate() const;

  bool operator==(const IndexGrid&) const = default;
};

/// Packed bit stream plus the framing metadata needed to decode it.
struct Payload {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint64_t kb_size = 0;
  std::uint8_t bits_per_index = 0;
  std::vector<std::uint8_t> stream;  // ceil(H*W*B/8) bytes, MSB-first

  bool operator==(const Payload&) const = default;
};

/// ceil(log2 K) bits per index; K = 1 still costs 1 bit so the stream stays
/// self-delimiting.
unsigned bits_per_index(std::uint64_t kb_size);

/// Nearest codebook vector per cell under the l2 norm, exact squared
/// distances in double; ties resolve to the smallest index.
IndexGrid quantize(const FeatureGrid& features, const Codebook& kb);

/// Receiver-side lookup: cell (h, w) becomes kb.vec(indices(h, w)).
FeatureGrid dequantize(const IndexGrid& indices, const Codebook& kb);

/// Serializes indices row-major, exactly bits_per_index bits each,
/// most-significant bit first, final byte zero-padded.
Payload pack(const IndexGrid& indices);

/// Exact inverse of pack. Throws decode_error for an index >= kb_size or
/// nonzero padding bits.
IndexGrid unpack(const Payload& payload);

/// KBP wire format: magic "KBP1", u32 version, u32 H, u32 W, u64 K, u8 B,
/// then the packed stream. Integers little-endian.
std::vector<std::uint8_t> to_wire(const Payload& payload);
Payload from_wire(std::span<const std::uint8_t> bytes);

// File formats. KBX carries a FeatureGrid (magic "KBX1", u32 version,
// u32 H, u32 W, u64 dim, f32 values); KBI carries an IndexGrid (magic
// "KBI1", u32 version, u32 H, u32 W, u64 K, u64 indices).
FeatureGrid load_kbx(const std::filesystem::path& path);
void save_kbx(const std::filesystem::path& path, const FeatureGrid& grid);
IndexGrid load_kbi(const std::filesystem::path& path);
void save_kbi(const std::filesystem::path& path, const IndexGrid& grid);
Payload load_kbp(const std::filesystem::path& path);
void save_kbp(const std::filesystem::path& path, const Payload& payload);

std::vector<std::uint8_t> to_kbx_bytes(const FeatureGrid& grid);
FeatureGrid from_kbx_bytes(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> to_kbi_bytes(const IndexGrid& grid);
IndexGrid from_kbi_bytes(std::span<const std::uint8_t> bytes);

}  // namespace kbz
