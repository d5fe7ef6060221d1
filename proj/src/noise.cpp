#include "hsilp/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "hsilp/errors.hpp"
#include "hsilp/parallel.hpp"

namespace hsilp {

namespace {

// Per-entry counter-based stream: the state is derived from (seed, entry
// index) alone, so the result never depends on how entries are split across
// workers.
struct SplitMix {
    std::uint64_t state;

    SplitMix(std::uint64_t seed, std::uint64_t index)
        : state(seed ^ (index * 0xD1B54A32D192ED03ull + 0x9E3779B97F4A7C15ull)) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double uniform() { return double(next() >> 11) * 0x1.0p-53; }       // [0, 1)
    double uniform_pos() { return double((next() >> 11) + 1) * 0x1.0p-53; }  // (0, 1]

    double gaussian() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Exact product method below mean 30, normal approximation above; both
    // match the tested moments (mean, variance) well within tolerances.
    double poisson(double mu) {
        if (mu <= 0.0) return 0.0;
        if (mu < 30.0) {
            const double limit = std::exp(-mu);
            double p = 1.0;
            double k = -1.0;
            do {
                k += 1.0;
                p *= uniform_pos();
            } while (p > limit);
            return k;
        }
        return std::max(0.0, std::round(mu + std::sqrt(mu) * gaussian()));
    }
};

float clamp_unit(double v) {
    return float(std::min(1.0, std::max(0.0, v)));
}

void check_scale(double scale) {
    if (scale < 0.0 || !std::isfinite(scale))
        throw Error(ErrorCode::invalid_argument, "noise scale must be a finite non-negative value");
}

template <typename PerEntry>
HsiCube transform(const HsiCube& cube, int workers, const PerEntry& fn) {
    cube.validate();
    HsiCube out = cube;
    parallel_for(out.values.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out.values[i] = fn(i, out.values[i]);
    });
    return out;
}

}  // namespace

NoiseModel parse_noise_model(const std::string& name) {
    if (name == "none") return NoiseModel::none;
    if (name == "gaussian") return NoiseModel::gaussian;
    if (name == "impulse") return NoiseModel::impulse;
    if (name == "poisson") return NoiseModel::poisson;
    throw Error(ErrorCode::invalid_argument, "unknown noise model '" + name + "'");
}

const char* to_string(NoiseModel model) {
    switch (model) {
        case NoiseModel::none: return "none";
        case NoiseModel::gaussian: return "gaussian";
        case NoiseModel::impulse: return "impulse";
        case NoiseModel::poisson: return "poisson";
    }
    return "none";
}

HsiCube add_gaussian(const HsiCube& cube, double scale, std::uint64_t seed, int workers) {
    check_scale(scale);
    if (scale == 0.0) return cube;
    return transform(cube, workers, [&](std::size_t i, float v) {
        SplitMix rng(seed, i);
        return clamp_unit(double(v) + scale * rng.gaussian());
    });
}

HsiCube add_impulse(const HsiCube& cube, double scale, std::uint64_t seed, int workers) {
    check_scale(scale);
    if (scale > 1.0)
        throw Error(ErrorCode::invalid_argument, "impulse probability cannot exceed 1");
    if (scale == 0.0) return cube;
    return transform(cube, workers, [&](std::size_t i, float v) -> float {
        SplitMix rng(seed, i);
        if (rng.uniform() >= scale) return v;
        return rng.uniform() < 0.5 ? 0.0f : 1.0f;
    });
}

HsiCube add_poisson(const HsiCube& cube, double scale, std::uint64_t seed, int workers) {
    check_scale(scale);
    if (scale == 0.0) return cube;
    const double lambda = 1.0 / (scale * scale);
    return transform(cube, workers, [&](std::size_t i, float v) {
        SplitMix rng(seed, i);
        const double mu = std::max(0.0, double(v)) * lambda;
        return clamp_unit(rng.poisson(mu) / lambda);
    });
}

HsiCube apply_noise(const HsiCube& cube, const NoiseSpec& spec, int workers) {
    switch (spec.model) {
        case NoiseModel::none: return cube;
        case NoiseModel::gaussian: return add_gaussian(cube, spec.scale, spec.seed, workers);
        case NoiseModel::impulse: return add_impulse(cube, spec.scale, spec.seed, workers);
        case NoiseModel::poisson: return add_poisson(cube, spec.scale, spec.seed, workers);
    }
    return cube;
}

}  // namespace hsilp
