#include "hsilp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hsilp/errors.hpp"

namespace hsilp {

HsiCube make_blob_cube(const SynthSpec& spec) {
    if (spec.classes < 1 || spec.classes > 255)
        throw Error(ErrorCode::invalid_argument, "class count outside [1, 255]");
    if (spec.height == 0 || spec.width == 0 || spec.bands == 0)
        throw Error(ErrorCode::invalid_argument, "zero cube dimension");
    if (spec.separation < 0.0 || spec.separation > 1.0)
        throw Error(ErrorCode::invalid_argument, "separation outside [0, 1]");
    if (std::size_t(1) << std::min<std::uint32_t>(spec.bands, 31) <= std::size_t(spec.classes))
        throw Error(ErrorCode::invalid_argument, "not enough bands to separate the classes");

    // Class signatures sit on distinct corners of a binary-code hypercube
    // around 0.5, so any two classes are at least `separation` apart in band
    // space regardless of the seed.
    const std::size_t pixels = std::size_t(spec.height) * spec.width;
    std::vector<std::vector<float>> signature(static_cast<std::size_t>(spec.classes));
    for (int c = 0; c < spec.classes; ++c) {
        auto& sig = signature[std::size_t(c)];
        sig.resize(spec.bands);
        const unsigned code = unsigned(c) + 1;
        for (std::uint32_t b = 0; b < spec.bands; ++b) {
            const bool bit = b < 31 && ((code >> b) & 1u);
            sig[b] = float(0.5 + (bit ? 0.5 : -0.5) * spec.separation);
        }
    }

    HsiCube cube;
    cube.height = spec.height;
    cube.width = spec.width;
    cube.bands = spec.bands;
    cube.values.resize(cube.value_count());
    cube.truth.emplace(pixels);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> jitter(0.0, spec.spread);
    for (std::size_t p = 0; p < pixels; ++p) {
        // Vertical class stripes; layout is irrelevant to a per-pixel method.
        const std::uint32_t col = std::uint32_t(p % spec.width);
        const int cls = std::min<int>(spec.classes - 1,
                                      int(std::uint64_t(col) * spec.classes / spec.width));
        (*cube.truth)[p] = std::uint16_t(cls + 1);
        for (std::uint32_t b = 0; b < spec.bands; ++b) {
            const double v = signature[std::size_t(cls)][b] + jitter(rng);
            cube.values[std::size_t(b) * pixels + p] =
                float(std::min(1.0, std::max(0.0, v)));
        }
    }
    return cube;
}

}  // namespace hsilp
