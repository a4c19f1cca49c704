#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "illum/error.hpp"
#include "illum/png_io.hpp"
#include "illum/rng.hpp"

using namespace illum;
using testing_support::TempDir;

TEST_SUITE("core") {

TEST_CASE("fnv1a64 published vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("splitmix64 reference output") {
  // First output of the reference generator seeded with 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("counter rng is a pure function of seed, stream and index") {
  CounterRng a(7, "x"), b(7, "x"), c(7, "y"), d(8, "x");
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    CHECK(va == b());
    differs_c |= va != c();
    differs_d |= va != d();
  }
  CHECK(differs_c);
  CHECK(differs_d);
}

TEST_CASE("counter rng draws have the advertised ranges and moments") {
  CounterRng r(3, "moments");
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("base64 RFC 4648 vectors") {
  const std::pair<const char*, const char*> cases[] = {
      {"", ""},         {"f", "Zg=="},         {"fo", "Zm8="},        {"foo", "Zm9v"},
      {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="}, {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, encoded] : cases) {
    const std::string p = plain;
    const std::vector<std::uint8_t> bytes(p.begin(), p.end());
    CHECK(base64_encode(bytes) == encoded);
    CHECK(base64_decode(encoded) == bytes);
  }
  CHECK_THROWS_AS(base64_decode("Zm9v!"), Error);
}

TEST_CASE("png round trip preserves every pixel") {
  Image img(37, 19);
  CounterRng r(1, "png");
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(r.below(256));
  CHECK(decode_png(encode_png(img)) == img);

  TempDir dir("png");
  write_png(dir.path() / "a.png", img);
  CHECK(read_png(dir.path() / "a.png") == img);

  Mask m(5, 4);
  m.at(1, 2) = 1;
  write_mask_png(dir.path() / "m.png", m);
  CHECK(read_mask_png(dir.path() / "m.png") == m);
  CHECK(read_png(dir.path() / "m.png").at(1, 2) == 255);
}

TEST_CASE("png decode rejects garbage and missing files") {
  CHECK_THROWS_AS(decode_png({1, 2, 3, 4}), Error);
  try {
    read_png("/nonexistent/x.png");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}

TEST_CASE("atomic write leaves no temp file") {
  TempDir dir("atomic");
  write_file_atomic(dir.path() / "f.txt", "hello");
  CHECK(testing_support::slurp(dir.path() / "f.txt") == "hello");
  write_file_atomic(dir.path() / "f.txt", "bye");
  CHECK(testing_support::slurp(dir.path() / "f.txt") == "bye");
  int files = 0;
  for ([[maybe_unused]] const auto& f : std::filesystem::directory_iterator(dir.path())) ++files;
  CHECK(files == 1);
}

TEST_CASE("nearest crop-resize of the full frame is the identity") {
  Image img(8, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) img.at(x, y) = static_cast<std::uint8_t>(x + 10 * y);
  CHECK(crop_resize_nearest(img, {0, 0, 8, 6}, 8, 6) == img);
  const auto half = crop_resize_nearest(img, {2, 2, 4, 2}, 2, 1);
  CHECK(half.at(0, 0) == img.at(2, 2));
  CHECK(half.at(1, 0) == img.at(4, 2));
}

TEST_CASE("flips are involutions and content hash sees them") {
  Image img(4, 3);
  img.at(0, 0) = 9;
  CHECK(flip_horizontal(flip_horizontal(img)) == img);
  CHECK(flip_vertical(flip_vertical(img)) == img);
  CHECK(flip_horizontal(img).at(3, 0) == 9);
  CHECK(content_hash(img) != content_hash(flip_horizontal(img)));
  CHECK(content_hash(img) == content_hash(Image(img)));
}

}  // TEST_SUITE
