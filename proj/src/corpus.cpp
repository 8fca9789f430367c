#include "mlpot/corpus.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace mlpot {

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double uniform(double a, double b) { return a + (b - a) * static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  int below(int k) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(k)); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

GridFunction corpus_function(const Grid& g, std::uint64_t seed) {
  Draw dr(seed);
  const int n = g.dim();
  const double half = g.half_width() / 2.0;
  const int kind = dr.below(3);
  const double amp = dr.uniform(0.5, 2.0);
  if (kind == 0) {
    const int level = 1 + dr.below(3);
    const double side = 2.0 * half / (1 << level);
    double lo[3] = {0.0, 0.0, 0.0};
    for (int d = 0; d < n; ++d) lo[d] = -half + side * dr.below(1 << level);
    return GridFunction::sample(g, [=](std::span<const double> x) {
      for (int d = 0; d < n; ++d)
        if (x[d] < lo[d] || x[d] >= lo[d] + side) return 0.0;
      return amp;
    });
  }
  const double r = dr.uniform(half / 4.0, half / 2.0);
  double c[3] = {0.0, 0.0, 0.0};
  for (int d = 0; d < n; ++d) c[d] = dr.uniform(-half + r, half - r);
  return GridFunction::sample(g, [=](std::span<const double> x) {
    double s = 0.0;
    for (int d = 0; d < n; ++d) s += (x[d] - c[d]) * (x[d] - c[d]);
    const double t = std::sqrt(s) / r;
    if (t >= 1.0) return 0.0;
    return kind == 1 ? amp * (1.0 - t) : amp * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
  });
}

std::vector<FunctionTuple> make_corpus(const Grid& g, int m, int count, std::uint64_t seed) {
  std::vector<FunctionTuple> out;
  std::mt19937_64 root(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int t = 0; t < count; ++t) {
    FunctionTuple tuple;
    for (int i = 0; i < m; ++i) tuple.push_back(corpus_function(g, root()));
    out.push_back(std::move(tuple));
  }
  return out;
}

}  // namespace mlpot
