#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kbz {

/// Ordered set of K feature vectors in R^dim. Index order is significant:
/// it is the identity a transmitted index refers to. Storage is float32 to
/// match the on-disk format; geometry always promotes to double.
struct Codebook {
  std::size_t dim = 0;
  std::vector<float> data;  // size() * dim, row-major

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }

  std::span<const float> vec(std::size_t k) const {
    return {data.data() + k * dim, dim};
  }

  /// Throws invalid_input if empty, ragged, or holding non-finite values.
  void validate() const;
};

/// Canonical KBF serialization: magic "KBF1", u32 version, u64 K, u64 dim,
/// then K*dim float32, all little-endian. Bit-exact round trip.
std::vector<std::uint8_t> to_kbf_bytes(const Codebook& cb);
Codebook from_kbf_bytes(std::span<const std::uint8_t> bytes);

Codebook load_kbf(const std::filesystem::path& path);
void save_kbf(const std::filesystem::path& path, const Codebook& cb);

/// SHA-256 of the canonical KBF bytes, lowercase hex.
std::string fingerprint_hex(const Codebook& cb);

/// One vector per row, comma-separated, floats with 17 significant digits.
std::string to_csv(const Codebook& cb);
Codebook from_csv(std::string_view text);
Codebook load_csv(const std::filesystem::path& path);
void save_csv(const std::filesystem::path& path, const Codebook& cb);

}  // namespace kbz
