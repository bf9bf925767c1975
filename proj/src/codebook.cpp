#include "kbz/codebook.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "kbz/error.hpp"
#include "kbz/io_util.hpp"

namespace kbz {

namespace {
constexpr std::uint32_t kKbfVersion = 1;
}

void Codebook::validate() const {
  if (dim == 0) throw invalid_input("codebook: dim must be >= 1");
  if (data.empty()) throw invalid_input("codebook: must hold at least one vector");
  if (data.size() % dim != 0)
    throw invalid_input("codebook: data size is not a multiple of dim");
  for (float x : data)
    if (!std::isfinite(x)) throw invalid_input("codebook: non-finite value");
}

std::vector<std::uint8_t> to_kbf_bytes(const Codebook& cb) {
  cb.validate();
  std::vector<std::uint8_t> out;
  out.reserve(24 + cb.data.size() * 4);
  out.insert(out.end(), {'K', 'B', 'F', '1'});
  put_u32(out, kKbfVersion);
  put_u64(out, cb.size());
  put_u64(out, cb.dim);
  for (float x : cb.data) put_f32(out, x);
  return out;
}

Codebook from_kbf_bytes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.magic("KBF1");
  const std::uint32_t version = r.u32();
  if (version != kKbfVersion)
    throw decode_error("unsupported KBF version " + std::to_string(version), 4);
  const std::uint64_t k = r.u64();
  const std::uint64_t dim = r.u64();
  if (k == 0 || dim == 0)
    throw decode_error("KBF with zero vectors or zero dim", 8);

  Codebook cb;
  cb.dim = static_cast<std::size_t>(dim);
  cb.data.reserve(static_cast<std::size_t>(k * dim));
  for (std::uint64_t i = 0; i < k * dim; ++i) cb.data.push_back(r.f32());
  if (r.remaining() != 0)
    throw decode_error("trailing bytes after KBF payload", r.offset());
  cb.validate();
  return cb;
}

Codebook load_kbf(const std::filesystem::path& path) {
  return from_kbf_bytes(read_file(path));
}

void save_kbf(const std::filesystem::path& path, const Codebook& cb) {
  write_file_atomic(path, std::span<const std::uint8_t>(to_kbf_bytes(cb)));
}

std::string fingerprint_hex(const Codebook& cb) {
  const auto bytes = to_kbf_bytes(cb);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw io_error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string to_csv(const Codebook& cb) {
  cb.validate();
  std::string out;
  for (std::size_t k = 0; k < cb.size(); ++k) {
    const auto v = cb.vec(k);
    for (std::size_t i = 0; i < cb.dim; ++i) {
      if (i) out.push_back(',');
      out += format_g17(v[i]);
    }
    out.push_back('\n');
  }
  return out;
}

Codebook from_csv(std::string_view text) {
  Codebook cb;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    std::size_t cols = 0;
    const char* s = line.c_str();
    while (true) {
      char* end = nullptr;
      const double v = std::strtod(s, &end);
      if (end == s)
        throw decode_error("CSV parse error on line " + std::to_string(line_no),
                           0);
      cb.data.push_back(static_cast<float>(v));
      ++cols;
      while (*end == ' ' || *end == '\t') ++end;
      if (*end == '\0') break;
      if (*end != ',')
        throw decode_error("CSV: expected ',' on line " + std::to_string(line_no),
                           0);
      s = end + 1;
    }
    if (cb.dim == 0) {
      cb.dim = cols;
    } else if (cols != cb.dim) {
      throw decode_error("CSV: ragged row on line " + std::to_string(line_no), 0);
    }
  }
  cb.validate();
  return cb;
}

Codebook load_csv(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return from_csv(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void save_csv(const std::filesystem::path& path, const Codebook& cb) {
  write_file_atomic(path, to_csv(cb));
}

}  // namespace kbz
