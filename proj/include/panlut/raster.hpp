// Planar multi-band raster container and the resampling operations used by
// the pan-sharpening pipeline: normalization from integer full-scale,
// Catmull-Rom bicubic upsampling, Wald-protocol degradation, band
// concatenation and replicate-padded reads.

#ifndef PANLUT_RASTER_HPP
#define PANLUT_RASTER_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "panlut/error.hpp"

namespace panlut {

// Band-sequential, row-major per band: samples[band*W*H + y*W + x].
// Samples are normalized to the nominal range [0,1] at ingest; intermediate
// pipeline buffers may carry out-of-range values until re-clamped.
struct MultiBandImage {
    int width = 0;
    int height = 0;
    int bands = 0;
    std::uint32_t source_vmax = 255;
    std::vector<double> samples;

    MultiBandImage() = default;
    MultiBandImage(int w, int h, int b, std::uint32_t vmax = 255)
        : width(w), height(h), bands(b), source_vmax(vmax),
          samples(static_cast<std::size_t>(w) * h * b, 0.0) {
        if (w < 1 || h < 1 || b < 1)
            throw ShapeError("image dimensions must be at least 1x1x1");
    }

    std::size_t plane() const { return static_cast<std::size_t>(width) * height; }
    std::size_t size() const { return plane() * bands; }

    double& at(int band, int x, int y) {
        return samples[static_cast<std::size_t>(band) * plane() +
                       static_cast<std::size_t>(y) * width + x];
    }
    double at(int band, int x, int y) const {
        return samples[static_cast<std::size_t>(band) * plane() +
                       static_cast<std::size_t>(y) * width + x];
    }

    double* band_ptr(int band) { return samples.data() + band * plane(); }
    const double* band_ptr(int band) const { return samples.data() + band * plane(); }
};

// Integer raster as it comes off disk, before normalization.
struct RawImage {
    int width = 0;
    int height = 0;
    int bands = 0;
    std::vector<std::uint32_t> samples; // same layout as MultiBandImage
};

// Divides every sample by vmax. Throws DomainError naming the offending
// band/pixel if a sample exceeds vmax.
MultiBandImage normalize_ingest(const RawImage& raw, std::uint32_t vmax);

// Inverse of normalize_ingest: scale by vmax and round to nearest integer.
RawImage denormalize(const MultiBandImage& img);

// Separable Catmull-Rom bicubic upsampling by an integer factor r >= 1,
// half-pixel center alignment, replicate padding. r == 1 returns a copy.
MultiBandImage upsample_bicubic(const MultiBandImage& ms, int r);

// Wald-protocol degradation: per band, Gaussian blur (sigma = r/4, truncated
// at 3*sigma, replicate padding) followed by r x r box averaging. Both inputs
// must have dimensions divisible by r.
std::pair<MultiBandImage, MultiBandImage>
wald_degrade(const MultiBandImage& hrms, const MultiBandImage& pan, int r);

// Single-image variant used where only one raster needs degrading.
MultiBandImage wald_degrade_one(const MultiBandImage& img, int r);

// a's bands first, then b's. Widths and heights must match.
MultiBandImage concat_bands(const MultiBandImage& a, const MultiBandImage& b);

// Extracts bands [first, first+count) into a new image.
MultiBandImage slice_bands(const MultiBandImage& img, int first, int count);

// Replicate-padded read: coordinates clamp to the image rectangle.
inline double read_padded(const MultiBandImage& img, int band, int x, int y) {
    if (band < 0 || band >= img.bands)
        throw DomainError("read_padded: band out of range");
    if (x < 0) x = 0;
    if (x >= img.width) x = img.width - 1;
    if (y < 0) y = 0;
    if (y >= img.height) y = img.height - 1;
    return img.at(band, x, y);
}

// Clamps every sample into [0,1] in place.
void clamp01(MultiBandImage& img);

// Catmull-Rom kernel weight at offset t (support |t| < 2).
double catmull_rom(double t);

} // namespace panlut

#endif
