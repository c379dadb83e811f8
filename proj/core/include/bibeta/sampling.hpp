#pragma once

#include <cstdint>

#include "bibeta/types.hpp"

namespace bibeta {

/// n draws from BivariateBeta(alpha) via four independent gamma variates:
/// X = (G1 + G2) / sum(G), Y = (G1 + G3) / sum(G). Deterministic in `seed`.
PairedSample sample(const AlphaParams& alpha, std::size_t n, std::uint64_t seed);

}  // namespace bibeta
