// Composes the three stages into the full model: input assembly
// (upsample + concat), inter-stage clamping, tape recording for training,
// strip-streamed inference and the model container format.

#ifndef PANLUT_PIPELINE_HPP
#define PANLUT_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "panlut/stages.hpp"

namespace panlut {

struct PanLutModel {
    PgLut pglut;
    SdLut sdlut;
    AoLut aolut;

    int n_points() const { return pglut.table.points; }
    SdMode sd_mode() const { return sdlut.mode; }
};

PanLutModel make_identity_model(int points, SdMode mode = SdMode::Chained);

// Throws ShapeError unless the three tables have the expected shapes and a
// shared point count.
void validate_model(const PanLutModel& model);

// Per-stage queries plus the clamp masks applied at stage boundaries;
// clamped samples propagate zero gradient.
struct GradientTape {
    int width = 0;
    int height = 0;
    StageTape pg;
    SdTape sd;
    StageTape ao;
    std::vector<std::uint8_t> clamp_pg;
    std::vector<std::uint8_t> clamp_sd;
    std::vector<std::uint8_t> clamp_final;
};

// Clamp into [0,1]; when mask is given, records which samples moved.
void clamp01_masked(MultiBandImage& img, std::vector<std::uint8_t>* mask);

// PM = concat(pan, clamp01(bicubic-upsampled ms)); PAN is band 0. The ratio
// is inferred from the dimensions and must be an integer >= 1.
MultiBandImage assemble_pm(const MultiBandImage& pan, const MultiBandImage& ms);

// Whole-image forward over an assembled PM, recording the tape if given:
// PGLUT -> clamp -> SDLUT -> clamp -> AOLUT -> clamp.
MultiBandImage model_forward(const PanLutModel& model, const MultiBandImage& pm,
                             GradientTape* tape = nullptr);

struct SharpenOptions {
    int strip_rows = 256; // rows per strip; <=0 means whole image
    int threads = 1;
};

// Full inference path. Processes the image in horizontal strips with a
// 2-row halo so memory stays strip-bounded; output is bitwise independent
// of strip size and thread count.
MultiBandImage sharpen(const PanLutModel& model, const MultiBandImage& pan,
                       const MultiBandImage& ms, const SharpenOptions& opts = {});

// Model container: "PANLUTM" | u8 version=1 | u8 sd_mode | u16 N |
// u32 reserved | PLUT blocks for PGLUT, SDLUT, AOLUT in order.
void write_model(const std::string& path, const PanLutModel& model);
PanLutModel read_model(const std::string& path);

} // namespace panlut

#endif
