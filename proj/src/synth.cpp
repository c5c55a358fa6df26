#include "panlut/synth.hpp"

#include <array>
#include <cmath>

namespace panlut {

SynthScene synth_scene(int width, int height, std::uint64_t seed) {
    if (width < 1 || height < 1) throw ShapeError("synth_scene: empty dimensions");
    Rng rng(seed);
    MultiBandImage hrms(width, height, 4, 2047);

    // One shared detail field carries the gradient, texture and rectangle
    // structure; each band is an affine map of it plus a small band-specific
    // gradient. That keeps the bands strongly correlated, the way
    // panchromatic detail relates to spectral bands.
    const double cx = rng.uniform(-0.25, 0.25);
    const double cy = rng.uniform(-0.25, 0.25);

    constexpr int kGrid = 17;
    std::array<double, kGrid * kGrid> noise;
    for (double& v : noise) v = rng.uniform();
    const double tex_amp = rng.uniform(0.06, 0.1);

    // rectangle plateaus dominate: their edges carry the high-frequency
    // detail the degraded MS loses and the PAN keeps
    constexpr int kRects = 28;
    struct Rect {
        int x0, y0, x1, y1;
        double offset;
    };
    std::array<Rect, kRects> rects;
    for (Rect& r : rects) {
        r.x0 = rng.uniform_int(0, width - 1);
        r.y0 = rng.uniform_int(0, height - 1);
        r.x1 = std::min(width, r.x0 + rng.uniform_int(width / 8 + 1, width / 2 + 1));
        r.y1 = std::min(height, r.y0 + rng.uniform_int(height / 8 + 1, height / 2 + 1));
        r.offset = rng.uniform(0.1, 0.22) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }

    std::array<double, 4> base, scale, gx, gy;
    for (int b = 0; b < 4; ++b) {
        base[b] = rng.uniform(0.42, 0.55);
        scale[b] = rng.uniform(0.55, 1.0);
        gx[b] = rng.uniform(-0.05, 0.05);
        gy[b] = rng.uniform(-0.05, 0.05);
    }

    const double sx = width > 1 ? 1.0 / (width - 1) : 0.0;
    const double sy = height > 1 ? 1.0 / (height - 1) : 0.0;
    for (int y = 0; y < height; ++y) {
        const double fy = y * sy;
        const double gyv = fy * (kGrid - 1);
        const int g_y = std::min(kGrid - 2, static_cast<int>(gyv));
        const double ty = gyv - g_y;
        for (int x = 0; x < width; ++x) {
            const double fx = x * sx;
            const double gxv = fx * (kGrid - 1);
            const int g_x = std::min(kGrid - 2, static_cast<int>(gxv));
            const double tx = gxv - g_x;
            const double n00 = noise[g_y * kGrid + g_x];
            const double n10 = noise[g_y * kGrid + g_x + 1];
            const double n01 = noise[(g_y + 1) * kGrid + g_x];
            const double n11 = noise[(g_y + 1) * kGrid + g_x + 1];
            const double tex = (1 - ty) * ((1 - tx) * n00 + tx * n10) +
                               ty * ((1 - tx) * n01 + tx * n11);
            double field = cx * fx + cy * fy + tex_amp * (tex - 0.5);
            for (const Rect& r : rects)
                if (x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) field += r.offset;
            for (int b = 0; b < 4; ++b) {
                double v = base[b] + gx[b] * fx + gy[b] * fy + scale[b] * field;
                if (v < 0.0) v = 0.0;
                if (v > 1.0) v = 1.0;
                hrms.band_ptr(b)[static_cast<std::size_t>(y) * width + x] = v;
            }
        }
    }

    MultiBandImage pan(width, height, 1, 2047);
    const double* bp[4] = {hrms.band_ptr(0), hrms.band_ptr(1), hrms.band_ptr(2),
                           hrms.band_ptr(3)};
    double* pp = pan.band_ptr(0);
    for (std::size_t i = 0; i < pan.plane(); ++i)
        pp[i] = std::pow(0.25 * (bp[0][i] + bp[1][i] + bp[2][i] + bp[3][i]), 0.9);

    return {std::move(hrms), std::move(pan)};
}

MultiBandImage random_image(int width, int height, int bands, Rng& rng) {
    MultiBandImage img(width, height, bands, 2047);
    for (double& v : img.samples) v = rng.uniform();
    return img;
}

} // namespace panlut
