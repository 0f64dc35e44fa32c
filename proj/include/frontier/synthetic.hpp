#pragma once

#include "frontier/dataset.hpp"

#include <cstdint>

namespace frontier {

// Deterministic stand-in for the unpublished country-level source data.
// Produces n units with m inputs, s outputs, and p explanatory covariates:
//   - inputs/outputs are strictly positive with a planted efficiency spread,
//     so a DEA run yields a non-trivial frontier;
//   - covariates correlate with the planted inefficiency, so a censored
//     second-stage regression is non-degenerate;
//   - when p >= 5 the fifth covariate is an exact linear combination of the
//     first two (plus a constant), planting a rank-deficient second-stage
//     design that must surface as a dropped column;
//   - a three-level income-style group column partitions units 22:18:6.
// The same seed always yields the byte-identical dataset; the generator
// draws from its own fixed uniform/normal mappings rather than the standard
// library's distribution objects, whose output is implementation-defined.
Dataset generate_synthetic(std::size_t n, std::size_t m, std::size_t s, std::size_t p,
                           std::uint64_t seed);

}  // namespace frontier
