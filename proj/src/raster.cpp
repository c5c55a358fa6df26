#include "panlut/raster.hpp"

#include <cmath>
#include <cstddef>
#include <string>

namespace panlut {

MultiBandImage normalize_ingest(const RawImage& raw, std::uint32_t vmax) {
    if (raw.width < 1 || raw.height < 1 || raw.bands < 1)
        throw ShapeError("normalize_ingest: empty raster");
    if (vmax == 0)
        throw DomainError("normalize_ingest: vmax must be positive");
    MultiBandImage out(raw.width, raw.height, raw.bands, vmax);
    const double inv = 1.0 / static_cast<double>(vmax);
    const std::size_t plane = out.plane();
    for (std::size_t i = 0; i < raw.samples.size(); ++i) {
        const std::uint32_t s = raw.samples[i];
        if (s > vmax) {
            const int band = static_cast<int>(i / plane);
            const std::size_t in_plane = i % plane;
            const int y = static_cast<int>(in_plane) / raw.width;
            const int x = static_cast<int>(in_plane) % raw.width;
            throw DomainError("normalize_ingest: sample " + std::to_string(s) +
                              " exceeds vmax " + std::to_string(vmax) + " at band " +
                              std::to_string(band) + ", pixel (" + std::to_string(x) +
                              "," + std::to_string(y) + ")");
        }
        out.samples[i] = static_cast<double>(s) * inv;
    }
    return out;
}

RawImage denormalize(const MultiBandImage& img) {
    RawImage out;
    out.width = img.width;
    out.height = img.height;
    out.bands = img.bands;
    out.samples.resize(img.size());
    const double vmax = static_cast<double>(img.source_vmax);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        double v = img.samples[i] * vmax;
        if (v < 0.0) v = 0.0;
        if (v > vmax) v = vmax;
        out.samples[i] = static_cast<std::uint32_t>(std::llround(v));
    }
    return out;
}

double catmull_rom(double t) {
    t = std::fabs(t);
    if (t < 1.0) return ((1.5 * t - 2.5) * t) * t + 1.0;
    if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
    return 0.0;
}

namespace {

struct CubicPhase {
    int base;     // leftmost tap relative to the source cell
    double w[4];
};

// One phase per output position within a source cell, half-pixel centers.
std::vector<CubicPhase> cubic_phases(int r) {
    std::vector<CubicPhase> phases(r);
    for (int p = 0; p < r; ++p) {
        const double src = (p + 0.5) / r - 0.5;
        const int i0 = static_cast<int>(std::floor(src));
        const double f = src - i0;
        phases[p].base = i0 - 1;
        phases[p].w[0] = catmull_rom(1.0 + f);
        phases[p].w[1] = catmull_rom(f);
        phases[p].w[2] = catmull_rom(1.0 - f);
        phases[p].w[3] = catmull_rom(2.0 - f);
    }
    return phases;
}

inline int clamp_index(int i, int n) {
    if (i < 0) return 0;
    if (i >= n) return n - 1;
    return i;
}

} // namespace

MultiBandImage upsample_bicubic(const MultiBandImage& ms, int r) {
    if (r < 1) throw DomainError("upsample_bicubic: ratio must be >= 1");
    if (r == 1) return ms;

    const auto phases = cubic_phases(r);
    const int w_out = ms.width * r;
    const int h_out = ms.height * r;
    MultiBandImage out(w_out, h_out, ms.bands, ms.source_vmax);

    // Horizontal pass into a W_out x H intermediate, then vertical.
    std::vector<double> tmp(static_cast<std::size_t>(w_out) * ms.height);
    for (int b = 0; b < ms.bands; ++b) {
        const double* src = ms.band_ptr(b);
        for (int y = 0; y < ms.height; ++y) {
            const double* row = src + static_cast<std::size_t>(y) * ms.width;
            double* dst = tmp.data() + static_cast<std::size_t>(y) * w_out;
            for (int x = 0; x < w_out; ++x) {
                const int q = x / r;
                const CubicPhase& ph = phases[x % r];
                double acc = 0.0;
                for (int j = 0; j < 4; ++j)
                    acc += ph.w[j] * row[clamp_index(q + ph.base + j, ms.width)];
                dst[x] = acc;
            }
        }
        double* dst_band = out.band_ptr(b);
        for (int y = 0; y < h_out; ++y) {
            const int q = y / r;
            const CubicPhase& ph = phases[y % r];
            const double* rows[4];
            for (int j = 0; j < 4; ++j)
                rows[j] = tmp.data() +
                          static_cast<std::size_t>(clamp_index(q + ph.base + j, ms.height)) * w_out;
            double* dst = dst_band + static_cast<std::size_t>(y) * w_out;
            for (int x = 0; x < w_out; ++x)
                dst[x] = ph.w[0] * rows[0][x] + ph.w[1] * rows[1][x] +
                         ph.w[2] * rows[2][x] + ph.w[3] * rows[3][x];
        }
    }
    return out;
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[i + radius] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

void blur_band(const double* src, double* dst, int w, int h,
               const std::vector<double>& kernel, std::vector<double>& scratch) {
    const int radius = static_cast<int>(kernel.size() / 2);
    // horizontal
    for (int y = 0; y < h; ++y) {
        const double* row = src + static_cast<std::size_t>(y) * w;
        double* out = scratch.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * row[clamp_index(x + i, w)];
            out[x] = acc;
        }
    }
    // vertical
    for (int y = 0; y < h; ++y) {
        double* out = dst + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] *
                       scratch[static_cast<std::size_t>(clamp_index(y + i, h)) * w + x];
            out[x] = acc;
        }
    }
}

} // namespace

MultiBandImage wald_degrade_one(const MultiBandImage& img, int r) {
    if (r < 2) throw DomainError("wald_degrade: ratio must be >= 2");
    if (img.width % r != 0 || img.height % r != 0)
        throw ShapeError("wald_degrade: dimensions " + std::to_string(img.width) + "x" +
                         std::to_string(img.height) + " not divisible by r=" +
                         std::to_string(r));
    const auto kernel = gaussian_kernel(r / 4.0);
    const int w_out = img.width / r;
    const int h_out = img.height / r;
    MultiBandImage out(w_out, h_out, img.bands, img.source_vmax);
    std::vector<double> blurred(img.plane());
    std::vector<double> scratch(img.plane());
    const double inv_area = 1.0 / (static_cast<double>(r) * r);
    for (int b = 0; b < img.bands; ++b) {
        blur_band(img.band_ptr(b), blurred.data(), img.width, img.height, kernel, scratch);
        double* dst = out.band_ptr(b);
        for (int y = 0; y < h_out; ++y) {
            for (int x = 0; x < w_out; ++x) {
                double acc = 0.0;
                for (int dy = 0; dy < r; ++dy)
                    for (int dx = 0; dx < r; ++dx)
                        acc += blurred[static_cast<std::size_t>(y * r + dy) * img.width +
                                       (x * r + dx)];
                dst[static_cast<std::size_t>(y) * w_out + x] = acc * inv_area;
            }
        }
    }
    return out;
}

std::pair<MultiBandImage, MultiBandImage>
wald_degrade(const MultiBandImage& hrms, const MultiBandImage& pan, int r) {
    if (hrms.width != pan.width || hrms.height != pan.height)
        throw ShapeError("wald_degrade: hrms and pan dimensions differ");
    return {wald_degrade_one(hrms, r), wald_degrade_one(pan, r)};
}

MultiBandImage concat_bands(const MultiBandImage& a, const MultiBandImage& b) {
    if (a.bands == 0) return b;
    if (b.bands == 0) return a;
    if (a.width != b.width || a.height != b.height)
        throw ShapeError("concat_bands: dimension mismatch " + std::to_string(a.width) +
                         "x" + std::to_string(a.height) + " vs " + std::to_string(b.width) +
                         "x" + std::to_string(b.height));
    MultiBandImage out(a.width, a.height, a.bands + b.bands, a.source_vmax);
    std::copy(a.samples.begin(), a.samples.end(), out.samples.begin());
    std::copy(b.samples.begin(), b.samples.end(), out.samples.begin() + a.size());
    return out;
}

MultiBandImage slice_bands(const MultiBandImage& img, int first, int count) {
    if (first < 0 || count < 1 || first + count > img.bands)
        throw ShapeError("slice_bands: band range out of bounds");
    MultiBandImage out(img.width, img.height, count, img.source_vmax);
    std::copy(img.samples.begin() + static_cast<std::ptrdiff_t>(first) * img.plane(),
              img.samples.begin() + static_cast<std::ptrdiff_t>(first + count) * img.plane(),
              out.samples.begin());
    return out;
}

void clamp01(MultiBandImage& img) {
    for (double& v : img.samples) {
        if (v < 0.0) v = 0.0;
        else if (v > 1.0) v = 1.0;
    }
}

} // namespace panlut
