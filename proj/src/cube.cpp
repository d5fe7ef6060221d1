#include "hsilp/cube.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hsilp/errors.hpp"

namespace hsilp {

namespace {

constexpr char kCubeMagic[4] = {'H', 'S', 'C', '1'};
constexpr char kLabelMagic[4] = {'H', 'S', 'L', '1'};

std::uint32_t read_u32(std::istream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    return std::uint32_t(buf[0]) | std::uint32_t(buf[1]) << 8 | std::uint32_t(buf[2]) << 16 |
           std::uint32_t(buf[3]) << 24;
}

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                            static_cast<unsigned char>((v >> 8) & 0xff),
                            static_cast<unsigned char>((v >> 16) & 0xff),
                            static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<char*>(buf), 4);
}

std::ifstream open_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path);
    return in;
}

}  // namespace

std::uint16_t HsiCube::class_count() const {
    if (!truth) return 0;
    std::uint16_t c = 0;
    for (auto id : *truth) c = std::max(c, id);
    return c;
}

void HsiCube::validate() const {
    if (values.size() != value_count())
        throw Error(ErrorCode::dimension_mismatch, "value buffer does not match dimensions");
    for (float v : values)
        if (!std::isfinite(v))
            throw Error(ErrorCode::non_finite_values, "cube contains non-finite reflectance");
    if (truth && truth->size() != pixel_count())
        throw Error(ErrorCode::dimension_mismatch, "truth raster does not match dimensions");
}

HsiCube load_cube(const std::string& path) {
    auto in = open_binary(path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCubeMagic, 4) != 0)
        throw Error(ErrorCode::malformed_header, path + " is not an HSC1 file");

    HsiCube cube;
    cube.height = read_u32(in);
    cube.width = read_u32(in);
    cube.bands = read_u32(in);
    if (!in) throw Error(ErrorCode::malformed_header, "header truncated in " + path);
    if (cube.height == 0 || cube.width == 0 || cube.bands == 0)
        throw Error(ErrorCode::malformed_header, "zero dimension in " + path);

    cube.values.resize(cube.value_count());
    static_assert(sizeof(float) == 4);
    in.read(reinterpret_cast<char*>(cube.values.data()),
            static_cast<std::streamsize>(cube.values.size() * sizeof(float)));
    if (std::size_t(in.gcount()) != cube.values.size() * sizeof(float))
        throw Error(ErrorCode::truncated_payload,
                    path + " payload shorter than header declares");
    // Trailing bytes also mean the header lies about the shape.
    if (in.peek() != EOF)
        throw Error(ErrorCode::truncated_payload, path + " has trailing bytes");

    for (float v : cube.values)
        if (!std::isfinite(v))
            throw Error(ErrorCode::non_finite_values, path + " contains non-finite values");
    return cube;
}

void save_cube(const HsiCube& cube, const std::string& path) {
    cube.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path);
    out.write(kCubeMagic, 4);
    write_u32(out, cube.height);
    write_u32(out, cube.width);
    write_u32(out, cube.bands);
    out.write(reinterpret_cast<const char*>(cube.values.data()),
              static_cast<std::streamsize>(cube.values.size() * sizeof(float)));
    if (!out) throw Error(ErrorCode::io_failure, "write failed for " + path);
}

std::vector<std::uint16_t> load_labels(const std::string& path) {
    return load_labels(path, 0, 0);
}

std::vector<std::uint16_t> load_labels(const std::string& path, std::uint32_t expect_height,
                                       std::uint32_t expect_width) {
    auto in = open_binary(path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kLabelMagic, 4) != 0)
        throw Error(ErrorCode::malformed_header, path + " is not an HSL1 file");

    const std::uint32_t height = read_u32(in);
    const std::uint32_t width = read_u32(in);
    if (!in) throw Error(ErrorCode::malformed_header, "header truncated in " + path);
    if (expect_height != 0 && (height != expect_height || width != expect_width))
        throw Error(ErrorCode::dimension_mismatch, path + " dimensions do not match the cube");

    std::vector<std::uint16_t> labels(std::size_t(height) * width);
    in.read(reinterpret_cast<char*>(labels.data()),
            static_cast<std::streamsize>(labels.size() * sizeof(std::uint16_t)));
    if (std::size_t(in.gcount()) != labels.size() * sizeof(std::uint16_t))
        throw Error(ErrorCode::truncated_payload, path + " payload shorter than header declares");
    if (in.peek() != EOF)
        throw Error(ErrorCode::truncated_payload, path + " has trailing bytes");
    return labels;
}

void save_labels(const std::vector<std::uint16_t>& labels, std::uint32_t height,
                 std::uint32_t width, const std::string& path) {
    if (labels.size() != std::size_t(height) * width)
        throw Error(ErrorCode::dimension_mismatch, "label buffer does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path);
    out.write(kLabelMagic, 4);
    write_u32(out, height);
    write_u32(out, width);
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size() * sizeof(std::uint16_t)));
    if (!out) throw Error(ErrorCode::io_failure, "write failed for " + path);
}

std::vector<std::uint32_t> parse_band_list(const std::string& spec) {
    std::vector<std::uint32_t> bands;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        const auto dash = token.find('-');
        try {
            if (dash == std::string::npos) {
                bands.push_back(static_cast<std::uint32_t>(std::stoul(token)));
            } else {
                const auto lo = std::stoul(token.substr(0, dash));
                const auto hi = std::stoul(token.substr(dash + 1));
                if (hi < lo) throw Error(ErrorCode::invalid_argument, "descending band range " + token);
                for (auto b = lo; b <= hi; ++b) bands.push_back(static_cast<std::uint32_t>(b));
            }
        } catch (const std::invalid_argument&) {
            throw Error(ErrorCode::invalid_argument, "bad band token '" + token + "'");
        } catch (const std::out_of_range&) {
            throw Error(ErrorCode::invalid_argument, "band index out of range in '" + token + "'");
        }
    }
    std::sort(bands.begin(), bands.end());
    bands.erase(std::unique(bands.begin(), bands.end()), bands.end());
    for (auto b : bands)
        if (b == 0) throw Error(ErrorCode::invalid_argument, "band indices are 1-based");
    return bands;
}

HsiCube cube_from_text_dump(const std::string& path, std::uint32_t height, std::uint32_t width,
                            const std::vector<std::uint32_t>& drop_bands_1based) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path);

    const std::size_t pixels = std::size_t(height) * width;
    std::vector<std::vector<float>> rows;
    rows.reserve(pixels);
    std::string line;
    std::size_t band_count = 0;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::vector<float> vals;
        double v;
        while (ls >> v) vals.push_back(static_cast<float>(v));
        if (vals.empty()) continue;  // blank line
        if (band_count == 0) band_count = vals.size();
        if (vals.size() != band_count)
            throw Error(ErrorCode::malformed_header,
                        "inconsistent column count at pixel " + std::to_string(rows.size()));
        rows.push_back(std::move(vals));
    }
    if (rows.size() != pixels)
        throw Error(ErrorCode::truncated_payload,
                    "expected " + std::to_string(pixels) + " pixels, found " +
                        std::to_string(rows.size()));

    std::vector<bool> keep(band_count, true);
    for (auto b : drop_bands_1based) {
        if (b > band_count)
            throw Error(ErrorCode::invalid_argument,
                        "drop band " + std::to_string(b) + " exceeds band count");
        keep[b - 1] = false;
    }
    std::uint32_t kept = 0;
    for (bool k : keep) kept += k;
    if (kept == 0) throw Error(ErrorCode::invalid_argument, "all bands dropped");

    HsiCube cube;
    cube.height = height;
    cube.width = width;
    cube.bands = kept;
    cube.values.resize(cube.value_count());
    std::uint32_t out_band = 0;
    for (std::size_t b = 0; b < band_count; ++b) {
        if (!keep[b]) continue;
        float* dst = cube.values.data() + std::size_t(out_band) * pixels;
        for (std::size_t p = 0; p < pixels; ++p) dst[p] = rows[p][b];
        ++out_band;
    }
    cube.validate();
    return cube;
}

std::vector<std::uint16_t> labels_from_text_dump(const std::string& path, std::uint32_t height,
                                                 std::uint32_t width) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path);
    std::vector<std::uint16_t> labels;
    labels.reserve(std::size_t(height) * width);
    long v;
    while (in >> v) {
        if (v < 0 || v > 0xffff)
            throw Error(ErrorCode::invalid_argument, "class id out of u16 range: " + std::to_string(v));
        labels.push_back(static_cast<std::uint16_t>(v));
    }
    if (labels.size() != std::size_t(height) * width)
        throw Error(ErrorCode::truncated_payload,
                    "expected " + std::to_string(std::size_t(height) * width) + " labels, found " +
                        std::to_string(labels.size()));
    return labels;
}

void save_pgm_preview(const std::vector<std::uint16_t>& labels, std::uint32_t height,
                      std::uint32_t width, const std::string& pgm_path,
                      const std::string& palette_path) {
    if (labels.size() != std::size_t(height) * width)
        throw Error(ErrorCode::dimension_mismatch, "label buffer does not match dimensions");
    std::uint16_t max_id = 0;
    for (auto id : labels) max_id = std::max(max_id, id);
    if (max_id > 255)
        throw Error(ErrorCode::invalid_argument, "PGM preview limited to 255 classes");

    std::ofstream out(pgm_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + pgm_path);
    out << "P5\n" << width << " " << height << "\n255\n";
    for (auto id : labels) out.put(static_cast<char>(id));
    if (!out) throw Error(ErrorCode::io_failure, "write failed for " + pgm_path);

    // Palette: id 0 is black; classes walk the hue wheel at full saturation.
    std::ofstream pal(palette_path);
    if (!pal) throw Error(ErrorCode::io_failure, "cannot write " + palette_path);
    pal << "# class_id r g b\n0 0 0 0\n";
    for (int id = 1; id <= max_id; ++id) {
        const double hue = 360.0 * (id - 1) / std::max<int>(1, max_id);
        const double x = 1.0 - std::fabs(std::fmod(hue / 60.0, 2.0) - 1.0);
        double r = 0, g = 0, b = 0;
        if (hue < 60) { r = 1; g = x; }
        else if (hue < 120) { r = x; g = 1; }
        else if (hue < 180) { g = 1; b = x; }
        else if (hue < 240) { g = x; b = 1; }
        else if (hue < 300) { r = x; b = 1; }
        else { r = 1; b = x; }
        pal << id << ' ' << int(r * 255) << ' ' << int(g * 255) << ' ' << int(b * 255) << '\n';
    }
}

}  // namespace hsilp
