// Deterministic procedural scenes: a desk-scale stand-in for satellite
// captures. The HRMS mixes smooth gradients, rectangles and band-correlated
// texture; the PAN is a fixed nonnegative band combination with mild gamma.

#ifndef PANLUT_SYNTH_HPP
#define PANLUT_SYNTH_HPP

#include <cstdint>
#include <random>

#include "panlut/raster.hpp"

namespace panlut {

// mt19937_64 with a hand-rolled uniform so streams are identical across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(uniform() * (hi - lo + 1));
    }

private:
    std::mt19937_64 gen_;
};

struct SynthScene {
    MultiBandImage hrms; // 4 bands
    MultiBandImage pan;  // pow(0.25 * sum of bands, 0.9)
};

SynthScene synth_scene(int width, int height, std::uint64_t seed);

// Uniform noise image in [0,1]; used by the benchmark harness.
MultiBandImage random_image(int width, int height, int bands, Rng& rng);

} // namespace panlut

#endif
