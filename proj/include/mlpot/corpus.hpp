#pragma once

#include <cstdint>
#include <vector>

#include "mlpot/grid.hpp"

namespace mlpot {

using FunctionTuple = std::vector<GridFunction>;

/// Seeded test functions: indicators of dyadic boxes, tents and raised-cosine
/// bumps with random amplitude, all supported in [-L/2, L/2)^n. Shapes are
/// drawn in physical coordinates, so the same seed gives the same functions on
/// every resolution.
std::vector<FunctionTuple> make_corpus(const Grid& g, int m, int count, std::uint64_t seed);

/// One corpus function from its own seed.
GridFunction corpus_function(const Grid& g, std::uint64_t seed);

}  // namespace mlpot
