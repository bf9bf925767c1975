#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "kbz/codebook.hpp"
#include "kbz/error.hpp"
#include "kbz/rng.hpp"

using namespace kbz;

namespace {

Codebook sample_codebook(std::uint64_t seed, std::size_t k, std::size_t dim) {
  Rng rng(seed);
  Codebook cb;
  cb.dim = dim;
  cb.data.resize(k * dim);
  for (float& x : cb.data) x = static_cast<float>(rng.normal());
  return cb;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("KBF bytes round-trip bit-exactly") {
  const Codebook cb = sample_codebook(1, 17, 5);
  const auto bytes = to_kbf_bytes(cb);
  CHECK(bytes.size() == 4 + 4 + 8 + 8 + 17 * 5 * 4);
  CHECK(bytes[0] == 'K');
  CHECK(bytes[1] == 'B');
  CHECK(bytes[2] == 'F');
  CHECK(bytes[3] == '1');

  const Codebook back = from_kbf_bytes(bytes);
  CHECK(back.dim == cb.dim);
  CHECK(back.data == cb.data);
  CHECK(to_kbf_bytes(back) == bytes);
}

TEST_CASE("KBF file save/load") {
  const Codebook cb = sample_codebook(2, 8, 3);
  const auto path = temp_file("kbz_test.kbf");
  save_kbf(path, cb);
  const Codebook back = load_kbf(path);
  CHECK(back.data == cb.data);
  std::filesystem::remove(path);
}

TEST_CASE("KBF decode errors carry byte offsets") {
  const Codebook cb = sample_codebook(3, 4, 2);
  auto bytes = to_kbf_bytes(cb);

  SUBCASE("corrupted magic") {
    bytes[1] = 'X';
    try {
      (void)from_kbf_bytes(bytes);
      FAIL("expected decode_error");
    } catch (const decode_error& e) {
      CHECK(e.byte_offset() == 0);
    }
  }
  SUBCASE("truncated payload") {
    bytes.resize(bytes.size() - 3);
    CHECK_THROWS_AS((void)from_kbf_bytes(bytes), decode_error);
  }
  SUBCASE("trailing garbage") {
    bytes.push_back(0);
    CHECK_THROWS_AS((void)from_kbf_bytes(bytes), decode_error);
  }
}

TEST_CASE("fingerprint binds to content") {
  Codebook cb = sample_codebook(4, 6, 4);
  const std::string fp = fingerprint_hex(cb);
  CHECK(fp.size() == 64);
  CHECK(fingerprint_hex(cb) == fp);

  cb.data[0] += 1.0f;
  CHECK(fingerprint_hex(cb) != fp);
}

TEST_CASE("CSV round trip preserves float values") {
  const Codebook cb = sample_codebook(5, 9, 7);
  const Codebook back = from_csv(to_csv(cb));
  CHECK(back.dim == cb.dim);
  CHECK(back.data == cb.data);
}

TEST_CASE("CSV rejects ragged and malformed rows") {
  CHECK_THROWS_AS((void)from_csv("1,2,3\n4,5\n"), decode_error);
  CHECK_THROWS_AS((void)from_csv("1,abc\n"), decode_error);
  CHECK_THROWS_AS((void)from_csv(""), invalid_input);
}

TEST_CASE("codebook validation") {
  Codebook cb;
  CHECK_THROWS_AS(cb.validate(), invalid_input);
  cb.dim = 2;
  cb.data = {1.0f, std::numeric_limits<float>::quiet_NaN()};
  CHECK_THROWS_AS(cb.validate(), invalid_input);
  cb.data = {1.0f, 2.0f, 3.0f};
  CHECK_THROWS_AS(cb.validate(), invalid_input);
}
