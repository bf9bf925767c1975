#include "kbz/codec.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "kbz/error.hpp"
#include "kbz/io_util.hpp"

namespace kbz {

namespace {
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kKbpHeaderSize = 4 + 4 + 4 + 4 + 8 + 1;

std::size_t stream_bytes(std::size_t cells, unsigned bits) {
  return (cells * bits + 7) / 8;
}
}  // namespace

void FeatureGrid::validate() const {
  if (height < 1 || width < 1) throw invalid_input("feature grid: empty");
  if (dim == 0) throw invalid_input("feature grid: dim must be >= 1");
  if (values.size() != height * width * dim)
    throw invalid_input("feature grid: value count does not match H*W*dim");
  for (float x : values)
    if (!std::isfinite(x)) throw invalid_input("feature grid: non-finite value");
}

void IndexGrid::validate() const {
  if (height < 1 || width < 1) throw invalid_input("index grid: empty");
  if (kb_size == 0) throw invalid_input("index grid: kb_size must be >= 1");
  if (indices.size() != height * width)
    throw invalid_input("index grid: index count does not match H*W");
  for (std::uint64_t idx : indices)
    if (idx >= kb_size)
      throw invalid_input("index grid: index " + std::to_string(idx) +
                          " >= kb_size " + std::to_string(kb_size));
}

unsigned bits_per_index(std::uint64_t kb_size) {
  if (kb_size == 0) throw invalid_input("bits_per_index: kb_size must be >= 1");
  if (kb_size == 1) return 1;
  return static_cast<unsigned>(std::bit_width(kb_size - 1));
}

IndexGrid quantize(const FeatureGrid& features, const Codebook& kb) {
  features.validate();
  kb.validate();
  if (features.dim != kb.dim)
    throw invalid_input("quantize: feature dim " + std::to_string(features.dim) +
                        " != codebook dim " + std::to_string(kb.dim));

  IndexGrid grid;
  grid.height = features.height;
  grid.width = features.width;
  grid.kb_size = kb.size();
  grid.indices.reserve(features.height * features.width);

  const std::size_t dim = kb.dim;
  for (std::size_t c = 0; c < features.height * features.width; ++c) {
    const float* x = features.values.data() + c * dim;
    std::uint64_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < kb.size(); ++k) {
      const float* s = kb.data.data() + k * dim;
      double d2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double diff = static_cast<double>(x[i]) - static_cast<double>(s[i]);
        d2 += diff * diff;
      }
      if (d2 < best_d2) {
        best_d2 = d2;
        best = k;
      }
    }
    grid.indices.push_back(best);
  }
  return grid;
}

FeatureGrid dequantize(const IndexGrid& indices, const Codebook& kb) {
  indices.validate();
  kb.validate();
  if (indices.kb_size != kb.size())
    throw invalid_input("dequantize: index grid assumes kb_size " +
                        std::to_string(indices.kb_size) + ", codebook has " +
                        std::to_string(kb.size()));

  FeatureGrid grid;
  grid.height = indices.height;
  grid.width = indices.width;
  grid.dim = kb.dim;
  grid.values.reserve(indices.indices.size() * kb.dim);
  for (std::uint64_t idx : indices.indices) {
    const auto v = kb.vec(static_cast<std::size_t>(idx));
    grid.values.insert(grid.values.end(), v.begin(), v.end());
  }
  return grid;
}

Payload pack(const IndexGrid& indices) {
  indices.validate();
  if (indices.height > UINT32_MAX || indices.width > UINT32_MAX)
    throw invalid_input("pack: grid dimensions exceed the wire format");

  Payload p;
  p.height = static_cast<std::uint32_t>(indices.height);
  p.width = static_cast<std::uint32_t>(indices.width);
  p.kb_size = indices.kb_size;
  const unsigned bits = bits_per_index(indices.kb_size);
  p.bits_per_index = static_cast<std::uint8_t>(bits);
  p.stream.reserve(stream_bytes(indices.indices.size(), bits));

  std::uint8_t acc = 0;
  unsigned filled = 0;
  for (std::uint64_t idx : indices.indices) {
    for (unsigned b = bits; b-- > 0;) {
      acc = static_cast<std::uint8_t>((acc << 1) | ((idx >> b) & 1));
      if (++filled == 8) {
        p.stream.push_back(acc);
        acc = 0;
        filled = 0;
      }
    }
  }
  if (filled > 0) p.stream.push_back(static_cast<std::uint8_t>(acc << (8 - filled)));
  return p;
}

IndexGrid unpack(const Payload& payload) {
  if (payload.height < 1 || payload.width < 1)
    throw decode_error("payload with empty grid", 0);
  if (payload.kb_size == 0) throw decode_error("payload with kb_size 0", 0);
  const unsigned bits = bits_per_index(payload.kb_size);
  if (payload.bits_per_index != bits)
    throw decode_error("bits_per_index " + std::to_string(payload.bits_per_index) +
                           " inconsistent with kb_size " +
                           std::to_string(payload.kb_size),
                       kKbpHeaderSize - 1);
  const std::size_t cells =
      std::size_t(payload.height) * std::size_t(payload.width);
  const std::size_t expected = stream_bytes(cells, bits);
  if (payload.stream.size() != expected)
    throw decode_error("payload stream has " + std::to_string(payload.stream.size()) +
                           " byte(s), expected " + std::to_string(expected),
                       kKbpHeaderSize + payload.stream.size());

  IndexGrid grid;
  grid.height = payload.height;
  grid.width = payload.width;
  grid.kb_size = payload.kb_size;
  grid.indices.reserve(cells);

  std::size_t bit_pos = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    std::uint64_t idx = 0;
    const std::size_t first_byte = bit_pos / 8;
    for (unsigned b = 0; b < bits; ++b, ++bit_pos) {
      const std::uint8_t byte = payload.stream[bit_pos / 8];
      idx = (idx << 1) | ((byte >> (7 - bit_pos % 8)) & 1);
    }
    if (idx >= payload.kb_size)
      throw decode_error("decoded index " + std::to_string(idx) +
                             " >= kb_size " + std::to_string(payload.kb_size),
                         kKbpHeaderSize + first_byte);
    grid.indices.push_back(idx);
  }
  // Canonical streams zero-pad the final byte.
  if (bit_pos % 8 != 0) {
    const std::uint8_t tail = payload.stream.back();
    if ((tail & ((1u << (8 - bit_pos % 8)) - 1)) != 0)
      throw decode_error("nonzero padding bits in final payload byte",
                         kKbpHeaderSize + payload.stream.size() - 1);
  }
  return grid;
}

std::vector<std::uint8_t> to_wire(const Payload& payload) {
  std::vector<std::uint8_t> out;
  out.reserve(kKbpHeaderSize + payload.stream.size());
  out.insert(out.end(), {'K', 'B', 'P', '1'});
  put_u32(out, kVersion);
  put_u32(out, payload.height);
  put_u32(out, payload.width);
  put_u64(out, payload.kb_size);
  out.push_back(payload.bits_per_index);
  out.insert(out.end(), payload.stream.begin(), payload.stream.end());
  return out;
}

Payload from_wire(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.magic("KBP1");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw decode_error("unsupported KBP version " + std::to_string(version), 4);
  Payload p;
  p.height = r.u32();
  p.width = r.u32();
  p.kb_size = r.u64();
  p.bits_per_index = r.u8();
  if (p.height < 1 || p.width < 1)
    throw decode_error("payload with empty grid", 8);
  if (p.kb_size == 0) throw decode_error("payload with kb_size 0", 16);
  const unsigned bits = bits_per_index(p.kb_size);
  if (p.bits_per_index != bits)
    throw decode_error("bits_per_index inconsistent with kb_size", 24);
  const std::size_t expected =
      stream_bytes(std::size_t(p.height) * std::size_t(p.width), bits);
  if (r.remaining() != expected)
    throw decode_error("payload stream has " + std::to_string(r.remaining()) +
                           " byte(s), expected " + std::to_string(expected),
                       r.offset());
  p.stream.assign(bytes.begin() + static_cast<std::ptrdiff_t>(r.offset()),
                  bytes.end());
  return p;
}

// --- file formats ---

std::vector<std::uint8_t> to_kbx_bytes(const FeatureGrid& grid) {
  grid.validate();
  if (grid.height > UINT32_MAX || grid.width > UINT32_MAX)
    throw invalid_input("KBX: grid dimensions exceed the format");
  std::vector<std::uint8_t> out;
  out.reserve(24 + grid.values.size() * 4);
  out.insert(out.end(), {'K', 'B', 'X', '1'});
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(grid.height));
  put_u32(out, static_cast<std::uint32_t>(grid.width));
  put_u64(out, grid.dim);
  for (float x : grid.values) put_f32(out, x);
  return out;
}

FeatureGrid from_kbx_bytes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.magic("KBX1");
  if (r.u32() != kVersion) throw decode_error("unsupported KBX version", 4);
  FeatureGrid grid;
  grid.height = r.u32();
  grid.width = r.u32();
  grid.dim = static_cast<std::size_t>(r.u64());
  if (grid.height < 1 || grid.width < 1 || grid.dim < 1)
    throw decode_error("KBX with empty grid", 8);
  const std::size_t n = grid.height * grid.width * grid.dim;
  grid.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) grid.values.push_back(r.f32());
  if (r.remaining() != 0)
    throw decode_error("trailing bytes after KBX payload", r.offset());
  grid.validate();
  return grid;
}

std::vector<std::uint8_t> to_kbi_bytes(const IndexGrid& grid) {
  grid.validate();
  if (grid.height > UINT32_MAX || grid.width > UINT32_MAX)
    throw invalid_input("KBI: grid dimensions exceed the format");
  std::vector<std::uint8_t> out;
  out.reserve(24 + grid.indices.size() * 8);
  out.insert(out.end(), {'K', 'B', 'I', '1'});
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(grid.height));
  put_u32(out, static_cast<std::uint32_t>(grid.width));
  put_u64(out, grid.kb_size);
  for (std::uint64_t idx : grid.indices) put_u64(out, idx);
  return out;
}

IndexGrid from_kbi_bytes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.magic("KBI1");
  if (r.u32() != kVersion) throw decode_error("unsupported KBI version", 4);
  IndexGrid grid;
  grid.height = r.u32();
  grid.width = r.u32();
  grid.kb_size = r.u64();
  if (grid.height < 1 || grid.width < 1 || grid.kb_size == 0)
    throw decode_error("KBI with empty grid or kb_size 0", 8);
  const std::size_t n = grid.height * grid.width;
  grid.indices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = r.offset();
    const std::uint64_t idx = r.u64();
    if (idx >= grid.kb_size)
      throw decode_error("index " + std::to_string(idx) + " >= kb_size " +
                             std::to_string(grid.kb_size),
                         at);
    grid.indices.push_back(idx);
  }
  if (r.remaining() != 0)
    throw decode_error("trailing bytes after KBI payload", r.offset());
  return grid;
}

FeatureGrid load_kbx(const std::filesystem::path& path) {
  return from_kbx_bytes(read_file(path));
}
void save_kbx(const std::filesystem::path& path, const FeatureGrid& grid) {
  write_file_atomic(path, std::span<const std::uint8_t>(to_kbx_bytes(grid)));
}
IndexGrid load_kbi(const std::filesystem::path& path) {
  return from_kbi_bytes(read_file(path));
}
void save_kbi(const std::filesystem::path& path, const IndexGrid& grid) {
  write_file_atomic(path, std::span<const std::uint8_t>(to_kbi_bytes(grid)));
}
Payload load_kbp(const std::filesystem::path& path) {
  return from_wire(read_file(path));
}
void save_kbp(const std::filesystem::path& path, const Payload& payload) {
  write_file_atomic(path, std::span<const std::uint8_t>(to_wire(payload)));
}

}  // namespace kbz
