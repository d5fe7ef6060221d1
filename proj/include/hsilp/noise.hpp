#pragma once

#include <cstdint>
#include <string>

#include "hsilp/cube.hpp"

namespace hsilp {

enum class NoiseModel { none, gaussian, impulse, poisson };

NoiseModel parse_noise_model(const std::string& name);
const char* to_string(NoiseModel model);

struct NoiseSpec {
    NoiseModel model = NoiseModel::none;
    double scale = 0.0;  // std / replacement probability / sqrt(1/lambda)
    std::uint64_t seed = 0;
};

/// value += N(0, scale^2) i.i.d. per entry, clamped to [0, 1]. Streams are
/// keyed by (seed, entry index), so results are worker-count independent.
HsiCube add_gaussian(const HsiCube& cube, double scale, std::uint64_t seed, int workers = 1);

/// Each entry independently replaced with probability `scale`; the replacement
/// is 0 or 1 with equal probability.
HsiCube add_impulse(const HsiCube& cube, double scale, std::uint64_t seed, int workers = 1);

/// v -> Poisson(v * lambda) / lambda with lambda = 1 / scale^2, clamped to
/// [0, 1]; negative inputs clamp to 0 before sampling.
HsiCube add_poisson(const HsiCube& cube, double scale, std::uint64_t seed, int workers = 1);

HsiCube apply_noise(const HsiCube& cube, const NoiseSpec& spec, int workers = 1);

}  // namespace hsilp
