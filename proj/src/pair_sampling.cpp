#include <cmath>
#include <vector>

#include "dopsim/errors.hpp"
#include "dopsim/instruments.hpp"
#include "dopsim/random.hpp"

namespace dopsim {

namespace {

std::size_t draw_line(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  std::size_t i = 0;
  while (i + 1 < cumulative.size() && u >= cumulative[i]) ++i;
  return i;
}

}  // namespace

PairSamplingResult sample_pair_singlet_fraction(const SourceSpec& src, std::size_t draws, std::uint64_t seed) {
  if (draws == 0) throw InvalidState("pair sampling needs at least one draw");
  const std::size_t n = src.size();
  std::vector<double> cumulative(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += src[i].intensity;
    cumulative[i] = acc;
  }
  std::vector<double> prob(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) prob[a * n + b] = singlet_probability(src[a].polarization, src[b].polarization);
  }

  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < draws; ++k) {
    const std::size_t a = draw_line(cumulative, rng);
    const std::size_t b = draw_line(cumulative, rng);
    if (rng.uniform() < prob[a * n + b]) ++hits;
  }
  const double f = static_cast<double>(hits) / static_cast<double>(draws);
  const double d = source_dop(src);
  // Binomial standard error evaluated at the exact rate keeps it non-zero for small counts.
  const double expected = 0.25 * (1.0 - d * d);
  return {draws, f, std::sqrt(expected * (1.0 - expected) / static_cast<double>(draws)), expected};
}

}  // namespace dopsim
