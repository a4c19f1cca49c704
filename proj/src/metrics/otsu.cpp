#include <array>

#include "illum/error.hpp"
#include "illum/metrics.hpp"

namespace illum {

OtsuResult otsu_localize(const Image& image) {
  std::array<std::int64_t, 256> hist{};
  for (auto v : image.pixels()) ++hist[v];
  int distinct = 0;
  for (auto c : hist) distinct += c > 0;
  if (distinct < 2)
    throw Error(ErrorKind::precondition, "Otsu needs an image with at least two intensities");

  std::int64_t total = 0;
  std::int64_t total_sum = 0;
  for (int v = 0; v < 256; ++v) {
    total += hist[v];
    total_sum += hist[v] * v;
  }

  // Between-class variance for "v < k" vs "v >= k" is proportional to
  // (S0*n1 - S1*n0)^2 / (n0*n1); candidates are compared as exact fractions.
  // |S0*n1 - S1*n0| <= 255*n0*n1, so the cross products fit in 127 bits up
  // to 2^19 pixels; larger images fall back to long double.
  const bool exact = total <= (std::int64_t{1} << 19);
  __extension__ typedef __int128 wide;
  int best_k = -1;
  wide best_num = 0;
  wide best_den = 1;
  std::int64_t n0 = 0;
  std::int64_t s0 = 0;
  for (int k = 1; k < 256; ++k) {
    n0 += hist[k - 1];
    s0 += hist[k - 1] * (k - 1);
    const std::int64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const wide diff = static_cast<wide>(s0) * n1 - static_cast<wide>(total_sum - s0) * n0;
    const wide num = diff * diff;
    const wide den = static_cast<wide>(n0) * n1;
    bool better = best_k < 0;
    if (!better && exact) {
      better = num * best_den > best_num * den;
    } else if (!better) {
      better = static_cast<long double>(num) / static_cast<long double>(den) >
               static_cast<long double>(best_num) / static_cast<long double>(best_den);
    }
    if (better) {
      best_k = k;
      best_num = num;
      best_den = den;
    }
  }

  OtsuResult out;
  out.threshold = best_k;
  out.mask = Mask(image.width(), image.height());
  const auto src = image.pixels();
  const auto dst = out.mask.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] < best_k ? 1 : 0;
  return out;
}

}  // namespace illum
