// Reference metrics (PSNR, SSIM, SAM, ERGAS) for reduced-resolution
// evaluation and the no-reference QNR suite (D_lambda, D_s, QNR) built from
// block-wise universal image quality indices.

#ifndef PANLUT_METRICS_HPP
#define PANLUT_METRICS_HPP

#include <optional>
#include <string>

#include "panlut/raster.hpp"

namespace panlut {

struct EvalReport {
    std::optional<double> psnr;
    std::optional<double> ssim;
    std::optional<double> sam;
    std::optional<double> ergas;
    std::optional<double> d_lambda;
    std::optional<double> d_s;
    std::optional<double> qnr;

    std::string to_json() const;
    std::string to_tsv() const; // values only, documented key order
};

// 10*log10(1/MSE) over all samples, capped at 100 dB (identical images).
double psnr(const MultiBandImage& pred, const MultiBandImage& gt);

// Mean SSIM over 11x11 Gaussian windows (sigma 1.5, K1=0.01, K2=0.03),
// valid-window positions only, averaged over bands. Requires min(W,H) >= 11.
double ssim(const MultiBandImage& pred, const MultiBandImage& gt);

// Mean per-pixel spectral angle in radians; zero-vector pixels are skipped.
double sam(const MultiBandImage& pred, const MultiBandImage& gt);

// 100/r * sqrt(mean over bands of (RMSE_b / mean_b)^2).
double ergas(const MultiBandImage& pred, const MultiBandImage& gt, int r);

struct QnrResult {
    double d_lambda = 0.0;
    double d_s = 0.0;
    double qnr = 0.0;
};

// Universal image quality index averaged over non-overlapping block x block
// windows; blocks where both operands have zero variance contribute Q=1.
// If no full block fits, the whole image forms a single block.
double q_index(const MultiBandImage& a, int band_a, const MultiBandImage& b,
               int band_b, int block);

// fused at PAN scale, ms_orig at 1/r. Full-scale pairs use `block`, reduced
// pairs use block/r (at least 2). QNR = (1 - D_lambda) * (1 - D_s).
QnrResult qnr_suite(const MultiBandImage& fused, const MultiBandImage& ms_orig,
                    const MultiBandImage& pan, int r, int block = 32);

} // namespace panlut

#endif
