#pragma once

#include <cstdint>

#include "hsilp/cube.hpp"

namespace hsilp {

/// Seeded synthetic scene: `classes` Gaussian blobs in band space, one class
/// id per pixel, reflectances in [0, 1]. Used by benchmarks and tests.
struct SynthSpec {
    std::uint32_t height = 32;
    std::uint32_t width = 32;
    std::uint32_t bands = 8;
    int classes = 3;
    double spread = 0.02;     // within-class band jitter (std)
    double separation = 0.6;  // distance between class signatures
    std::uint64_t seed = 0;
};

HsiCube make_blob_cube(const SynthSpec& spec);

}  // namespace hsilp
