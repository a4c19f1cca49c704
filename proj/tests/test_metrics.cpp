#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "illum/dataset.hpp"
#include "illum/error.hpp"
#include "illum/metrics.hpp"
#include "illum/png_io.hpp"
#include "illum/rng.hpp"

using namespace illum;
using doctest::Approx;
using testing_support::TempDir;

namespace {

ResponseMap random_map(int w, int h, CounterRng& rng) {
  ResponseMap m(w, h);
  for (auto& v : m.pixels()) v = rng.uniform();
  return m;
}

Mask mask_from_bits(unsigned bits) {
  Mask m(3, 3);
  for (int i = 0; i < 9; ++i) m.pixels()[i] = (bits >> i) & 1u;
  return m;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("mse hand values") {
  ResponseMap a(2, 2), z(2, 2), ones(2, 2, 1.0);
  a.pixels()[0] = 0;
  a.pixels()[1] = 0.5;
  a.pixels()[2] = 1;
  a.pixels()[3] = 0.25;
  CHECK(mse(a, z) == 0.328125);
  CHECK(mse(a, a) == 0);
  CHECK(mse(z, ones) == 1.0);
  CHECK_THROWS_AS(mse(a, ResponseMap(3, 2)), Error);
}

TEST_CASE("ssim identity, symmetry and naive oracle") {
  CounterRng rng(42, "ssim");
  const LossConfig cfg;
  for (int i = 0; i < 20; ++i) {
    const auto a = random_map(16, 16, rng);
    const auto b = random_map(16, 16, rng);
    CHECK(std::abs(ssim(a, a, cfg) - 1.0) <= 1e-9);
    CHECK(std::abs(ssim(a, b, cfg) - ssim(b, a, cfg)) <= 1e-12);
    const double oracle = testing_support::naive_ssim(a, b, 11, 1.5, 1e-4, 9e-4);
    CHECK(std::abs(ssim(a, b, cfg) - oracle) <= 1e-6);
    CHECK(ssim(a, b, cfg) == ssim_serial(a, b, cfg));
  }
}

TEST_CASE("ssim rejects images smaller than the window") {
  CHECK_THROWS_AS(ssim(ResponseMap(8, 8), ResponseMap(8, 8)), Error);
}

TEST_CASE("combined loss composition") {
  CounterRng rng(1, "loss");
  const auto p = random_map(24, 20, rng);
  const auto t = random_map(24, 20, rng);
  LossConfig cfg;
  const double hand = 0.4 * mse(p, t) + 0.6 * (1.0 - ssim(p, t, cfg));
  CHECK(std::abs(combined_loss(p, t, cfg) - hand) <= 1e-12);
  CHECK(std::abs(combined_loss(t, t, cfg)) <= 1e-12);
  LossConfig mse_only;
  mse_only.alpha = 1;
  mse_only.beta = 0;
  CHECK(combined_loss(p, t, mse_only) == mse(p, t));
  LossConfig bad;
  bad.alpha = 0.5;
  CHECK_THROWS_AS(combined_loss(p, t, bad), Error);
  bad = LossConfig{};
  bad.ssim_window = 10;
  CHECK_THROWS_AS(combined_loss(p, t, bad), Error);
}

TEST_CASE("binarize: >= convention, extremes and monotonicity") {
  ResponseMap r(4, 4, 0.22);
  CHECK(count_set(binarize(r)) == 16);
  CounterRng rng(3, "bin");
  const auto m = random_map(16, 16, rng);
  CHECK(count_set(binarize(m, 0.0)) == 256);
  CHECK(count_set(binarize(m, 1.0 + 1e-9)) == 0);
  std::size_t prev = 257;
  for (int i = 0; i <= 100; ++i) {
    const auto bits = binarize(m, i / 100.0);
    CHECK(count_set(bits) <= prev);
    prev = count_set(bits);
  }
}

TEST_CASE("segmentation metrics: conventions") {
  Mask a(4, 4), b(4, 4);
  a.at(0, 0) = 1;
  b.at(3, 3) = 1;
  const auto same = segmentation_metrics(a, a);
  CHECK(same.pixel_accuracy == 1.0);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.f1 == 1.0);
  CHECK(same.miou == 1.0);
  const auto disjoint = segmentation_metrics(a, b);
  CHECK(disjoint.precision == 0.0);
  CHECK(disjoint.recall == 0.0);
  CHECK(disjoint.f1 == 0.0);
  const auto empty = segmentation_metrics(Mask(4, 4), Mask(4, 4));
  CHECK(empty.precision == 1.0);
  CHECK(empty.f1 == 1.0);
  CHECK(empty.miou == 1.0);
  CHECK(segmentation_metrics(a, Mask(4, 4)).precision == 0.0);
  CHECK_THROWS_AS(segmentation_metrics(a, Mask(3, 4)), Error);
}

TEST_CASE("segmentation metrics equal set arithmetic on a sample of 3x3 pairs") {
  // The full 2^9 x 2^9 sweep runs in the acceptance suite.
  for (unsigned p = 0; p < 512; p += 7)
    for (unsigned g = 0; g < 512; g += 5) {
      const auto pm = mask_from_bits(p), gm = mask_from_bits(g);
      const auto r = segmentation_metrics(pm, gm);
      const auto o = testing_support::set_metrics(pm, gm);
      REQUIRE(r.pixel_accuracy == o.accuracy);
      REQUIRE(r.precision == o.precision);
      REQUIRE(r.recall == o.recall);
      REQUIRE(r.f1 == o.f1);
      REQUIRE(r.miou == o.miou);
    }
}

TEST_CASE("classification: hand-tallied 20-item fixture") {
  // tp 7, fn 3, fp 2, tn 8
  std::vector<std::string> gt, pred;
  const auto add = [&](const char* g, const char* p, int n) {
    for (int i = 0; i < n; ++i) {
      gt.emplace_back(g);
      pred.emplace_back(p);
    }
  };
  add("illusion", "illusion", 7);
  add("illusion", "non_illusion", 3);
  add("non_illusion", "illusion", 2);
  add("non_illusion", "non_illusion", 8);
  const auto r = classification_metrics(gt, pred);
  CHECK(r.accuracy == Approx(15.0 / 20));
  CHECK(r.precision == Approx(7.0 / 9));
  CHECK(r.recall == Approx(7.0 / 10));
  CHECK(r.f1 == Approx(14.0 / 19));
  CHECK(r.confusion[0][0] == 7);
  CHECK(r.confusion[0][1] == 3);
  CHECK(r.confusion[1][0] == 2);
  CHECK(r.confusion[1][1] == 8);
}

TEST_CASE("classification: perfect, all-positive and unknown labels") {
  const std::vector<std::string> gt{"illusion", "non_illusion", "illusion", "non_illusion"};
  const auto perfect = classification_metrics(gt, gt);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.f1 == 1.0);
  const auto pos = classification_metrics(gt, std::vector<std::string>(4, "illusion"));
  CHECK(pos.recall == 1.0);
  CHECK(pos.precision == 0.5);
  CHECK_THROWS_AS(classification_metrics(gt, {"illusion", "x", "illusion", "illusion"}), Error);
  // Multiclass: macro average of per-class values.
  const std::vector<std::string> classes{"sbc", "white", "grid"};
  const auto mc = classification_metrics({"sbc", "white", "grid", "grid"},
                                         {"sbc", "grid", "grid", "grid"}, classes);
  // sbc p=r=1; white p=0 r=0; grid p=2/3 r=1
  CHECK(mc.precision == Approx((1.0 + 0.0 + 2.0 / 3) / 3));
  CHECK(mc.recall == Approx((1.0 + 0.0 + 1.0) / 3));
}

TEST_CASE("otsu: two levels split between them") {
  Image img(10, 10, 200);
  for (int x = 0; x < 10; ++x) img.at(x, 3) = 50;
  const auto r = otsu_localize(img);
  CHECK(r.threshold > 50);
  CHECK(r.threshold <= 200);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) CHECK(r.mask.at(x, y) == (img.at(x, y) == 50));
  CHECK_THROWS_AS(otsu_localize(Image(4, 4, 9)), Error);
}

TEST_CASE("otsu: matches the exhaustive between-class variance scan") {
  CounterRng rng(5, "otsu");
  for (int t = 0; t < 40; ++t) {
    Image img(23, 17);
    const int levels = 2 + static_cast<int>(rng.below(30));
    for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(levels)) * 255 / levels);
    if (t % 3 == 0)
      for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rng.below(256));
    CHECK(otsu_localize(img).threshold == testing_support::naive_otsu(img));
  }
}

TEST_CASE("otsu: sbc patches always share a class") {
  for (int w : {16, 40, 100}) {
    SbcSpec s;
    s.patch_width = w;
    const auto r = render_sbc(s);
    const auto o = otsu_localize(r.image);
    std::set<int> target, ref;
    for (std::size_t i = 0; i < o.mask.size(); ++i) {
      if (r.mask.pixels()[i]) target.insert(o.mask.pixels()[i]);
      if (r.reference.pixels()[i]) ref.insert(o.mask.pixels()[i]);
    }
    CHECK(target.size() == 1);
    CHECK(target == ref);
  }
}

TEST_CASE("evaluate directory: perfect, empty and recomputed aggregates") {
  TempDir d("eval");
  SweepConfig c;
  c.targets = {{Family::sbc, 3}, {Family::white, 3}, {Family::grid, 2}};
  const auto m = build_dataset(c, d.path() / "corpus");
  const auto perfect = d.path() / "perfect";
  const auto zeros = d.path() / "zeros";
  std::filesystem::create_directories(perfect);
  std::filesystem::create_directories(zeros);
  for (const auto& e : m.entries) {
    const auto gt = read_mask_png(m.root / e.mask_path);
    write_png(perfect / (e.id + ".png"), mask_to_image(gt));
    write_png(zeros / (e.id + ".png"), Image(gt.width(), gt.height()));
  }
  const auto rp = evaluate_directory(perfect, m);
  CHECK(rp.rows.size() == 8);
  CHECK(rp.aggregate.f1 == 1.0);
  CHECK(rp.aggregate.miou == 1.0);
  CHECK(std::abs(rp.mean_loss) < 1e-12);

  const auto rz = evaluate_directory(zeros, m);
  CHECK(rz.aggregate.recall == 0.0);
  double f1 = 0, mse_sum = 0;
  for (const auto& row : rz.rows) {
    const auto gt = read_mask_png(m.root / m.find(row.id)->mask_path);
    const auto pred = read_png(zeros / (row.id + ".png"));
    f1 += segmentation_metrics(binarize(to_response(pred)), gt).f1;
    mse_sum += mse(to_response(pred), to_response(gt));
  }
  CHECK(rz.aggregate.f1 == Approx(f1 / rz.rows.size()));
  CHECK(rz.mean_mse == Approx(mse_sum / rz.rows.size()));

  EvalOptions serial;
  serial.parallel = false;
  const auto rs = evaluate_directory(zeros, m, serial);
  CHECK(rs.mean_ssim == rz.mean_ssim);

  const auto files = write_report(rz, d.path() / "report");
  CHECK(files.size() == 2);
  for (const auto& f : files) CHECK(std::filesystem::exists(f));
}

TEST_CASE("evaluate directory: missing and misshapen predictions name the id") {
  TempDir d("eval_err");
  SweepConfig c;
  c.targets = {{Family::sbc, 2}};
  const auto m = build_dataset(c, d.path() / "corpus");
  const auto pred = d.path() / "pred";
  std::filesystem::create_directories(pred);
  write_png(pred / (m.entries[0].id + ".png"), Image(256, 256));
  try {
    evaluate_directory(pred, m);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_found);
    CHECK(std::string(e.what()).find(m.entries[1].id) != std::string::npos);
  }
  write_png(pred / (m.entries[1].id + ".png"), Image(10, 10));
  try {
    evaluate_directory(pred, m);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
    CHECK(std::string(e.what()).find(m.entries[1].id) != std::string::npos);
  }
}

}  // TEST_SUITE
