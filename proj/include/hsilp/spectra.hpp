#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "hsilp/cube.hpp"

namespace hsilp {

/// Flattened pixel-feature matrix (one row per retained pixel) with the
/// mapping back to raster positions.
struct SpectraMatrix {
    Eigen::MatrixXd data;                      // n x d
    std::vector<std::uint32_t> pixel_index;    // row -> linear raster index (r * width + c)

    Eigen::Index rows() const { return data.rows(); }
    Eigen::Index dim() const { return data.cols(); }
};

/// Contiguous row ranges over a SpectraMatrix, each of size <= theta.
struct SlicePlan {
    std::size_t theta = 0;
    struct Range {
        std::size_t begin = 0;
        std::size_t end = 0;  // exclusive
        std::size_t size() const { return end - begin; }
    };
    std::vector<Range> slices;
};

/// ceil(n / theta) contiguous slices; concatenating them reproduces row order.
SlicePlan slice_pixels(std::size_t n, std::size_t theta);

/// Divides every band by its global max absolute reflectance so each band lies
/// in [-1, 1] (typically [0, 1]). Bands that are identically zero are left
/// untouched. Returns the per-band scale factors that were divided out.
std::vector<float> normalize_per_band(HsiCube& cube);

/// Extracts per-pixel band vectors as rows. With annotated_only, background
/// pixels (truth 0) are skipped; a cube without truth keeps every pixel.
SpectraMatrix flatten_cube(const HsiCube& cube, bool annotated_only);

}  // namespace hsilp
