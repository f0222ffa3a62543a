#include "spurious/parallel.hpp"

#include <omp.h>

namespace spurious {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial) {
  // Two rounds of mixing keep nearby (seed, trial) pairs far apart in seed space.
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(trial + 0x632be59bd9b4e019ULL)));
}

int worker_count() { return omp_get_max_threads(); }

MeanEstimate estimate_mean(std::span<const double> values) {
  MeanEstimate est;
  est.count = values.size();
  if (values.empty()) return est;
  // Welford in index order keeps the result independent of how values were produced.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double delta = v - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (v - mean);
  }
  est.mean = mean;
  if (k > 1) {
    const double variance = m2 / static_cast<double>(k - 1);
    est.std_error = std::sqrt(variance / static_cast<double>(k));
  }
  return est;
}

}  // namespace spurious
