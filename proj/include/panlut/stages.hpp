// The three model stages: PGLUT (PAN-guided channel-wise spectral mapping,
// 5-D/5-out), SDLUT (per-band spatial details over a 2x2 neighborhood with
// rotation indexing, 4-D/1-out) and AOLUT (adaptive channel aggregation,
// 5-D/4-out). Each is a thin orchestration over the lattice module.

#ifndef PANLUT_STAGES_HPP
#define PANLUT_STAGES_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "panlut/lattice.hpp"
#include "panlut/raster.hpp"

namespace panlut {

enum class SdMode : std::uint8_t { Chained = 0, Ensemble = 1 };

struct PgLut {
    LutTable table; // D=5, E=5
};

struct SdLut {
    LutTable table; // D=4, E=1, shared across bands
    SdMode mode = SdMode::Chained;
};

struct AoLut {
    LutTable table; // D=5, E=4
};

// Identity initialization: the untrained chain reproduces the upsampled MS.
PgLut make_identity_pglut(int points);
SdLut make_identity_sdlut(int points, SdMode mode = SdMode::Chained);
AoLut make_identity_aolut(int points);

// The four 2x2 quadrant orientations of the rotation-indexing strategy.
// Orientation k reads the base pattern rotated k*90 degrees; together the
// four quadrants cover the 3x3 block around the pixel. Axis 0 is always the
// pixel itself.
struct SdOrientation {
    std::array<int, 4> dx;
    std::array<int, 4> dy;
};
const std::array<SdOrientation, 4>& sd_orientations();

// Per-stage record of lattice queries, pixel-major (band-major for SDLUT).
struct StageTape {
    std::vector<LatticeQuery> queries;
};

// SDLUT keeps one query set per pass/orientation; chained mode also records
// which inter-pass samples were clamped (those propagate zero gradient).
struct SdTape {
    std::array<StageTape, 4> passes;
    std::array<std::vector<std::uint8_t>, 3> clamped;
};

// Per pixel, (pa,r,g,b,nir) -> 5 outputs via pentalinear interpolation.
MultiBandImage pglut_forward(const PgLut& lut, const MultiBandImage& pm,
                             StageTape* tape = nullptr);

// Per band. Chained: four sequential passes, each pass's output clamped to
// [0,1] and fed to the next. Ensemble: the four orientation lookups applied
// to the same input and averaged.
MultiBandImage sdlut_forward(const SdLut& lut, const MultiBandImage& v,
                             SdTape* tape = nullptr);

// Per pixel, the 5 band values -> 4 HRMS band values.
MultiBandImage aolut_forward(const AoLut& lut, const MultiBandImage& v,
                             StageTape* tape = nullptr);

// Backward passes: accumulate entry gradients and return dL/dinput. Border
// contributions scatter onto the replicate-clamped source pixels.
MultiBandImage pglut_backward(const PgLut& lut, const StageTape& tape,
                              const MultiBandImage& dL_dout,
                              std::vector<double>& entry_grads);
MultiBandImage sdlut_backward(const SdLut& lut, const SdTape& tape,
                              const MultiBandImage& dL_dout,
                              std::vector<double>& entry_grads);
MultiBandImage aolut_backward(const AoLut& lut, const StageTape& tape,
                              const MultiBandImage& dL_dout,
                              std::vector<double>& entry_grads);

} // namespace panlut

#endif
