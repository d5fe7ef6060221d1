#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hsilp {

/// Raw hyperspectral raster. `values` is band-sequential (BSQ): all of band 0
/// row-major, then band 1, ... Truth ids use 0 for unlabeled/background and
/// 1..c for classes.
struct HsiCube {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t bands = 0;
    std::vector<float> values;
    std::optional<std::vector<std::uint16_t>> truth;

    std::size_t pixel_count() const { return std::size_t(height) * width; }
    std::size_t value_count() const { return pixel_count() * bands; }

    float& at(std::uint32_t row, std::uint32_t col, std::uint32_t band) {
        return values[std::size_t(band) * pixel_count() + std::size_t(row) * width + col];
    }
    float at(std::uint32_t row, std::uint32_t col, std::uint32_t band) const {
        return values[std::size_t(band) * pixel_count() + std::size_t(row) * width + col];
    }

    /// Highest truth id, 0 when no truth raster is attached.
    std::uint16_t class_count() const;

    /// Checks size consistency and value finiteness; throws hsilp::Error.
    void validate() const;
};

// HSC1: magic "HSC1", LE u32 height/width/bands, then h*w*b LE f32 in BSQ order.
HsiCube load_cube(const std::string& path);
void save_cube(const HsiCube& cube, const std::string& path);

// HSL1: magic "HSL1", LE u32 height/width, then h*w LE u16 class ids.
std::vector<std::uint16_t> load_labels(const std::string& path, std::uint32_t expect_height,
                                       std::uint32_t expect_width);
std::vector<std::uint16_t> load_labels(const std::string& path);
void save_labels(const std::vector<std::uint16_t>& labels, std::uint32_t height,
                 std::uint32_t width, const std::string& path);

/// Parses a whitespace-separated text dump (one pixel per line, bands as
/// columns, pixels in row-major order) into a cube, dropping the listed
/// 1-based band indices. Used by the `convert` subcommand.
HsiCube cube_from_text_dump(const std::string& path, std::uint32_t height, std::uint32_t width,
                            const std::vector<std::uint32_t>& drop_bands_1based = {});

/// Parses a label dump (one class id per line, row-major).
std::vector<std::uint16_t> labels_from_text_dump(const std::string& path, std::uint32_t height,
                                                 std::uint32_t width);

/// Expands a drop-band spec like "104-108,150-163,220" into 1-based indices.
std::vector<std::uint32_t> parse_band_list(const std::string& spec);

/// Writes an 8-bit PGM of the class-id raster plus a "<id> <r> <g> <b>" palette
/// side file for visual inspection.
void save_pgm_preview(const std::vector<std::uint16_t>& labels, std::uint32_t height,
                      std::uint32_t width, const std::string& pgm_path,
                      const std::string& palette_path);

}  // namespace hsilp
