#include "hsilp/spectra.hpp"

#include <cmath>

#include "hsilp/errors.hpp"

namespace hsilp {

SlicePlan slice_pixels(std::size_t n, std::size_t theta) {
    if (theta == 0) throw Error(ErrorCode::invalid_argument, "slice size must be positive");
    SlicePlan plan;
    plan.theta = theta;
    for (std::size_t begin = 0; begin < n; begin += theta)
        plan.slices.push_back({begin, std::min(n, begin + theta)});
    return plan;
}

std::vector<float> normalize_per_band(HsiCube& cube) {
    cube.validate();
    const std::size_t pixels = cube.pixel_count();
    std::vector<float> scales(cube.bands, 1.0f);
    for (std::uint32_t b = 0; b < cube.bands; ++b) {
        float* band = cube.values.data() + std::size_t(b) * pixels;
        float max_abs = 0.0f;
        for (std::size_t p = 0; p < pixels; ++p) max_abs = std::max(max_abs, std::fabs(band[p]));
        if (max_abs == 0.0f) continue;  // flat band, nothing to scale
        scales[b] = max_abs;
        for (std::size_t p = 0; p < pixels; ++p) band[p] /= max_abs;
    }
    return scales;
}

SpectraMatrix flatten_cube(const HsiCube& cube, bool annotated_only) {
    cube.validate();
    const std::size_t pixels = cube.pixel_count();
    const bool filter = annotated_only && cube.truth.has_value();

    SpectraMatrix out;
    out.pixel_index.reserve(pixels);
    for (std::size_t p = 0; p < pixels; ++p) {
        if (filter && (*cube.truth)[p] == 0) continue;
        out.pixel_index.push_back(static_cast<std::uint32_t>(p));
    }
    if (out.pixel_index.empty())
        throw Error(ErrorCode::invalid_argument, "no annotated pixels to flatten");

    out.data.resize(Eigen::Index(out.pixel_index.size()), Eigen::Index(cube.bands));
    for (Eigen::Index r = 0; r < out.data.rows(); ++r) {
        const std::size_t p = out.pixel_index[std::size_t(r)];
        for (std::uint32_t b = 0; b < cube.bands; ++b)
            out.data(r, b) = cube.values[std::size_t(b) * pixels + p];
    }
    return out;
}

}  // namespace hsilp
