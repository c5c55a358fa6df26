#include "panlut/stages.hpp"

namespace panlut {

namespace {

// visits every lattice point in flat order (last axis fastest)
template <typename Fn>
void for_each_point(int dims, int points, Fn&& fn) {
    std::array<int, kMaxLutDims> idx{};
    std::size_t total = 1;
    for (int l = 0; l < dims; ++l) total *= static_cast<std::size_t>(points);
    for (std::size_t p = 0; p < total; ++p) {
        fn(idx.data());
        for (int l = dims - 1; l >= 0; --l) {
            if (++idx[l] < points) break;
            idx[l] = 0;
        }
    }
}

} // namespace

PgLut make_identity_pglut(int points) {
    PgLut lut{LutTable(5, points, 5)};
    const double scale = 1.0 / (points - 1);
    double* e = lut.table.entries.data();
    for_each_point(5, points, [&](const int* idx) {
        for (int c = 0; c < 5; ++c) *e++ = idx[c] * scale;
    });
    return lut;
}

SdLut make_identity_sdlut(int points, SdMode mode) {
    SdLut lut{LutTable(4, points, 1), mode};
    const double scale = 1.0 / (points - 1);
    double* e = lut.table.entries.data();
    for_each_point(4, points, [&](const int* idx) { *e++ = idx[0] * scale; });
    return lut;
}

AoLut make_identity_aolut(int points) {
    AoLut lut{LutTable(5, points, 4)};
    const double scale = 1.0 / (points - 1);
    double* e = lut.table.entries.data();
    for_each_point(5, points, [&](const int* idx) {
        for (int c = 0; c < 4; ++c) *e++ = idx[c + 1] * scale;
    });
    return lut;
}

const std::array<SdOrientation, 4>& sd_orientations() {
    // base pattern (0,0),(1,0),(0,1),(1,1) conjugated by successive 90-degree
    // rotations (dx,dy) -> (dy,-dx); set-wise these are the four quadrants
    static const std::array<SdOrientation, 4> kOrients = {{
        {{0, 1, 0, 1}, {0, 0, 1, 1}},
        {{0, 0, 1, 1}, {0, -1, 0, -1}},
        {{0, -1, 0, -1}, {0, 0, -1, -1}},
        {{0, 0, -1, -1}, {0, 1, 0, 1}},
    }};
    return kOrients;
}

MultiBandImage pglut_forward(const PgLut& lut, const MultiBandImage& pm, StageTape* tape) {
    if (pm.bands != 5)
        throw ShapeError("pglut_forward: expected 5 bands, got " + std::to_string(pm.bands));
    const LatticeLayout layout(lut.table);
    MultiBandImage out(pm.width, pm.height, 5, pm.source_vmax);
    const std::size_t plane = pm.plane();
    if (tape) tape->queries.resize(plane);
    const double* in[5];
    double* dst[5];
    for (int b = 0; b < 5; ++b) {
        in[b] = pm.band_ptr(b);
        dst[b] = out.band_ptr(b);
    }
    double v[5], o[5];
    for (std::size_t i = 0; i < plane; ++i) {
        for (int b = 0; b < 5; ++b) v[b] = in[b][i];
        const LatticeQuery q = locate(v, 5, lut.table.points);
        interpolate(lut.table, layout, q, o);
        for (int b = 0; b < 5; ++b) dst[b][i] = o[b];
        if (tape) tape->queries[i] = q;
    }
    return out;
}

namespace {

inline int clampi(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

// One orientation lookup over a full image; per band, per pixel.
void sd_pass(const LutTable& table, const LatticeLayout& layout,
             const SdOrientation& ori, const MultiBandImage& src,
             MultiBandImage& dst, StageTape* tape) {
    const int w = src.width, h = src.height;
    const std::size_t plane = src.plane();
    if (tape) tape->queries.resize(plane * src.bands);
    double v[4];
    for (int b = 0; b < src.bands; ++b) {
        const double* sp = src.band_ptr(b);
        double* dp = dst.band_ptr(b);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int j = 0; j < 4; ++j) {
                    const int sx = clampi(x + ori.dx[j], w - 1);
                    const int sy = clampi(y + ori.dy[j], h - 1);
                    v[j] = sp[static_cast<std::size_t>(sy) * w + sx];
                }
                const LatticeQuery q = locate(v, 4, table.points);
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                double o;
                interpolate(table, layout, q, &o);
                dp[i] = o;
                if (tape) tape->queries[b * plane + i] = q;
            }
        }
    }
}

} // namespace

MultiBandImage sdlut_forward(const SdLut& lut, const MultiBandImage& v, SdTape* tape) {
    const LatticeLayout layout(lut.table);
    const auto& orients = sd_orientations();
    if (lut.mode == SdMode::Ensemble) {
        MultiBandImage acc(v.width, v.height, v.bands, v.source_vmax);
        MultiBandImage pass(v.width, v.height, v.bands, v.source_vmax);
        for (int k = 0; k < 4; ++k) {
            sd_pass(lut.table, layout, orients[k], v, pass,
                    tape ? &tape->passes[k] : nullptr);
            for (std::size_t i = 0; i < acc.samples.size(); ++i)
                acc.samples[i] += pass.samples[i];
        }
        for (double& s : acc.samples) s *= 0.25;
        return acc;
    }
    // chained: each pass consumes the previous pass's clamped output
    MultiBandImage cur = v;
    MultiBandImage next(v.width, v.height, v.bands, v.source_vmax);
    for (int k = 0; k < 4; ++k) {
        sd_pass(lut.table, layout, orients[k], cur, next,
                tape ? &tape->passes[k] : nullptr);
        if (k < 3) {
            if (tape) {
                auto& mask = tape->clamped[k];
                mask.assign(next.samples.size(), 0);
                for (std::size_t i = 0; i < next.samples.size(); ++i)
                    if (next.samples[i] < 0.0 || next.samples[i] > 1.0) mask[i] = 1;
            }
            clamp01(next);
        }
        std::swap(cur, next);
    }
    return cur;
}

MultiBandImage aolut_forward(const AoLut& lut, const MultiBandImage& v, StageTape* tape) {
    if (v.bands != 5)
        throw ShapeError("aolut_forward: expected 5 bands, got " + std::to_string(v.bands));
    const LatticeLayout layout(lut.table);
    MultiBandImage out(v.width, v.height, 4, v.source_vmax);
    const std::size_t plane = v.plane();
    if (tape) tape->queries.resize(plane);
    const double* in[5];
    double* dst[4];
    for (int b = 0; b < 5; ++b) in[b] = v.band_ptr(b);
    for (int b = 0; b < 4; ++b) dst[b] = out.band_ptr(b);
    double vv[5], o[4];
    for (std::size_t i = 0; i < plane; ++i) {
        for (int b = 0; b < 5; ++b) vv[b] = in[b][i];
        const LatticeQuery q = locate(vv, 5, lut.table.points);
        interpolate(lut.table, layout, q, o);
        for (int b = 0; b < 4; ++b) dst[b][i] = o[b];
        if (tape) tape->queries[i] = q;
    }
    return out;
}

MultiBandImage pglut_backward(const PgLut& lut, const StageTape& tape,
                              const MultiBandImage& dL_dout,
                              std::vector<double>& entry_grads) {
    if (dL_dout.bands != 5) throw ShapeError("pglut_backward: expected 5 bands");
    const std::size_t plane = dL_dout.plane();
    if (tape.queries.size() != plane)
        throw ShapeError("pglut_backward: tape does not match gradient shape");
    const LatticeLayout layout(lut.table);
    MultiBandImage din(dL_dout.width, dL_dout.height, 5, dL_dout.source_vmax);
    const double* g[5];
    double* d[5];
    for (int b = 0; b < 5; ++b) {
        g[b] = dL_dout.band_ptr(b);
        d[b] = din.band_ptr(b);
    }
    double gv[5], dv[5];
    for (std::size_t i = 0; i < plane; ++i) {
        for (int b = 0; b < 5; ++b) gv[b] = g[b][i];
        const LatticeQuery& q = tape.queries[i];
        backprop_entries(lut.table, layout, q, gv, entry_grads);
        backprop_inputs(lut.table, layout, q, gv, dv);
        for (int b = 0; b < 5; ++b) d[b][i] = dv[b];
    }
    return din;
}

MultiBandImage aolut_backward(const AoLut& lut, const StageTape& tape,
                              const MultiBandImage& dL_dout,
                              std::vector<double>& entry_grads) {
    if (dL_dout.bands != 4) throw ShapeError("aolut_backward: expected 4 bands");
    const std::size_t plane = dL_dout.plane();
    if (tape.queries.size() != plane)
        throw ShapeError("aolut_backward: tape does not match gradient shape");
    const LatticeLayout layout(lut.table);
    MultiBandImage din(dL_dout.width, dL_dout.height, 5, dL_dout.source_vmax);
    const double* g[4];
    double* d[5];
    for (int b = 0; b < 4; ++b) g[b] = dL_dout.band_ptr(b);
    for (int b = 0; b < 5; ++b) d[b] = din.band_ptr(b);
    double gv[4], dv[5];
    for (std::size_t i = 0; i < plane; ++i) {
        for (int b = 0; b < 4; ++b) gv[b] = g[b][i];
        const LatticeQuery& q = tape.queries[i];
        backprop_entries(lut.table, layout, q, gv, entry_grads);
        backprop_inputs(lut.table, layout, q, gv, dv);
        for (int b = 0; b < 5; ++b) d[b][i] = dv[b];
    }
    return din;
}

namespace {

// Backward of one orientation pass: scatter neighbor gradients through the
// replicate clamp map. `scale` folds in the ensemble's 1/4.
void sd_pass_backward(const LutTable& table, const LatticeLayout& layout,
                      const SdOrientation& ori, const StageTape& tape,
                      const MultiBandImage& dL_dout, double scale,
                      MultiBandImage& din, std::vector<double>& entry_grads) {
    const int w = dL_dout.width, h = dL_dout.height;
    const std::size_t plane = dL_dout.plane();
    if (tape.queries.size() != plane * dL_dout.bands)
        throw ShapeError("sdlut_backward: tape does not match gradient shape");
    double dv[4];
    for (int b = 0; b < dL_dout.bands; ++b) {
        const double* gp = dL_dout.band_ptr(b);
        double* dp = din.band_ptr(b);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                const double g = gp[i] * scale;
                if (g == 0.0) continue;
                const LatticeQuery& q = tape.queries[b * plane + i];
                backprop_entries(table, layout, q, &g, entry_grads);
                backprop_inputs(table, layout, q, &g, dv);
                for (int j = 0; j < 4; ++j) {
                    const int sx = clampi(x + ori.dx[j], w - 1);
                    const int sy = clampi(y + ori.dy[j], h - 1);
                    dp[static_cast<std::size_t>(sy) * w + sx] += dv[j];
                }
            }
        }
    }
}

} // namespace

MultiBandImage sdlut_backward(const SdLut& lut, const SdTape& tape,
                              const MultiBandImage& dL_dout,
                              std::vector<double>& entry_grads) {
    const LatticeLayout layout(lut.table);
    const auto& orients = sd_orientations();
    if (lut.mode == SdMode::Ensemble) {
        MultiBandImage din(dL_dout.width, dL_dout.height, dL_dout.bands,
                           dL_dout.source_vmax);
        for (int k = 0; k < 4; ++k)
            sd_pass_backward(lut.table, layout, orients[k], tape.passes[k], dL_dout,
                             0.25, din, entry_grads);
        return din;
    }
    MultiBandImage g = dL_dout;
    for (int k = 3; k >= 0; --k) {
        MultiBandImage prev(dL_dout.width, dL_dout.height, dL_dout.bands,
                            dL_dout.source_vmax);
        sd_pass_backward(lut.table, layout, orients[k], tape.passes[k], g, 1.0, prev,
                         entry_grads);
        if (k > 0) {
            const auto& mask = tape.clamped[k - 1];
            if (mask.size() != prev.samples.size())
                throw ShapeError("sdlut_backward: clamp mask shape mismatch");
            for (std::size_t i = 0; i < prev.samples.size(); ++i)
                if (mask[i]) prev.samples[i] = 0.0;
        }
        g = std::move(prev);
    }
    return g;
}

} // namespace panlut
