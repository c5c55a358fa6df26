#include "panlut/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <fstream>
#include <thread>

namespace panlut {

PanLutModel make_identity_model(int points, SdMode mode) {
    return {make_identity_pglut(points), make_identity_sdlut(points, mode),
            make_identity_aolut(points)};
}

void validate_model(const PanLutModel& model) {
    const auto& pg = model.pglut.table;
    const auto& sd = model.sdlut.table;
    const auto& ao = model.aolut.table;
    if (pg.dims != 5 || pg.out_channels != 5)
        throw ShapeError("model: PGLUT must be 5-D with 5 outputs");
    if (sd.dims != 4 || sd.out_channels != 1)
        throw ShapeError("model: SDLUT must be 4-D with 1 output");
    if (ao.dims != 5 || ao.out_channels != 4)
        throw ShapeError("model: AOLUT must be 5-D with 4 outputs");
    if (pg.points != sd.points || pg.points != ao.points)
        throw ShapeError("model: tables must share the same point count");
}

void clamp01_masked(MultiBandImage& img, std::vector<std::uint8_t>* mask) {
    if (mask) mask->assign(img.samples.size(), 0);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        double& v = img.samples[i];
        if (v < 0.0) {
            v = 0.0;
            if (mask) (*mask)[i] = 1;
        } else if (v > 1.0) {
            v = 1.0;
            if (mask) (*mask)[i] = 1;
        }
    }
}

namespace {

int infer_ratio(const MultiBandImage& pan, const MultiBandImage& ms) {
    if (pan.bands != 1) throw ShapeError("sharpen: PAN must have exactly 1 band");
    if (ms.bands != 4) throw ShapeError("sharpen: MS must have exactly 4 bands");
    if (ms.width < 1 || ms.height < 1) throw ShapeError("sharpen: empty MS");
    if (pan.width % ms.width != 0 || pan.height % ms.height != 0)
        throw ShapeError("sharpen: PAN dimensions are not an integer multiple of MS");
    const int rx = pan.width / ms.width;
    const int ry = pan.height / ms.height;
    if (rx != ry || rx < 1)
        throw ShapeError("sharpen: inconsistent PAN/MS resolution ratio " +
                         std::to_string(rx) + "x" + std::to_string(ry));
    return rx;
}

} // namespace

MultiBandImage assemble_pm(const MultiBandImage& pan, const MultiBandImage& ms) {
    const int r = infer_ratio(pan, ms);
    MultiBandImage up = upsample_bicubic(ms, r);
    clamp01(up);
    MultiBandImage pm = concat_bands(pan, up);
    pm.source_vmax = ms.source_vmax;
    return pm;
}

MultiBandImage model_forward(const PanLutModel& model, const MultiBandImage& pm,
                             GradientTape* tape) {
    validate_model(model);
    if (tape) {
        tape->width = pm.width;
        tape->height = pm.height;
    }
    MultiBandImage vpg = pglut_forward(model.pglut, pm, tape ? &tape->pg : nullptr);
    clamp01_masked(vpg, tape ? &tape->clamp_pg : nullptr);
    MultiBandImage vsd = sdlut_forward(model.sdlut, vpg, tape ? &tape->sd : nullptr);
    clamp01_masked(vsd, tape ? &tape->clamp_sd : nullptr);
    MultiBandImage hrms = aolut_forward(model.aolut, vsd, tape ? &tape->ao : nullptr);
    clamp01_masked(hrms, tape ? &tape->clamp_final : nullptr);
    return hrms;
}

namespace {

// A horizontal slice of a full-height image: local row 0 is global row row0.
struct Strip {
    MultiBandImage buf;
    int row0 = 0;
};

inline int clampi(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

// Orientation lookup over strip rows [out_row0, out_row0+out_rows), reading
// neighbors clamped against the full image bounds. Matches the whole-image
// pass pixel for pixel.
void sd_pass_strip(const LutTable& table, const LatticeLayout& layout,
                   const SdOrientation& ori, const Strip& in, Strip& out,
                   int out_row0, int out_rows, int full_w, int full_h) {
    out.row0 = out_row0;
    out.buf = MultiBandImage(full_w, out_rows, in.buf.bands, in.buf.source_vmax);
    double v[4];
    for (int b = 0; b < in.buf.bands; ++b) {
        const double* sp = in.buf.band_ptr(b);
        double* dp = out.buf.band_ptr(b);
        for (int ly = 0; ly < out_rows; ++ly) {
            const int gy = out_row0 + ly;
            for (int x = 0; x < full_w; ++x) {
                for (int j = 0; j < 4; ++j) {
                    const int sx = clampi(x + ori.dx[j], full_w - 1);
                    const int sy = clampi(gy + ori.dy[j], full_h - 1) - in.row0;
                    v[j] = sp[static_cast<std::size_t>(sy) * full_w + sx];
                }
                const LatticeQuery q = locate(v, 4, table.points);
                double o;
                interpolate(table, layout, q, &o);
                dp[static_cast<std::size_t>(ly) * full_w + x] = o;
            }
        }
    }
}

void process_strip(const PanLutModel& model, const MultiBandImage& pan,
                   const MultiBandImage& ms_up, MultiBandImage& out,
                   int y0, int y1) {
    const int W = pan.width;
    const int H = pan.height;
    const bool chained = model.sd_mode() == SdMode::Chained;
    const int halo = chained ? 2 : 1;
    const int ext0 = std::max(0, y0 - halo);
    const int ext1 = std::min(H, y1 + halo);
    const int ext_rows = ext1 - ext0;

    // PM strip: PAN rows + upsampled MS rows
    Strip pm;
    pm.row0 = ext0;
    pm.buf = MultiBandImage(W, ext_rows, 5, ms_up.source_vmax);
    std::memcpy(pm.buf.band_ptr(0),
                pan.band_ptr(0) + static_cast<std::size_t>(ext0) * W,
                sizeof(double) * static_cast<std::size_t>(ext_rows) * W);
    for (int b = 0; b < 4; ++b)
        std::memcpy(pm.buf.band_ptr(b + 1),
                    ms_up.band_ptr(b) + static_cast<std::size_t>(ext0) * W,
                    sizeof(double) * static_cast<std::size_t>(ext_rows) * W);

    Strip vpg;
    vpg.row0 = ext0;
    vpg.buf = pglut_forward(model.pglut, pm.buf);
    clamp01(vpg.buf);

    const auto& orients = sd_orientations();
    const LatticeLayout sd_layout(model.sdlut.table);
    Strip vsd;
    if (chained) {
        // pass output ranges shrink toward the strip: the k-th pass only
        // needs the rows later passes will read
        const int r0[4] = {std::max(0, y0 - 2), std::max(0, y0 - 1), std::max(0, y0), y0};
        const int r1[4] = {std::min(H, y1 + 1), std::min(H, y1 + 1), std::min(H, y1 + 1), y1};
        Strip cur = std::move(vpg);
        for (int k = 0; k < 4; ++k) {
            Strip next;
            sd_pass_strip(model.sdlut.table, sd_layout, orients[k], cur, next,
                          r0[k], r1[k] - r0[k], W, H);
            if (k < 3) clamp01(next.buf);
            cur = std::move(next);
        }
        vsd = std::move(cur);
    } else {
        vsd.row0 = y0;
        vsd.buf = MultiBandImage(W, y1 - y0, 5, vpg.buf.source_vmax);
        Strip pass;
        for (int k = 0; k < 4; ++k) {
            sd_pass_strip(model.sdlut.table, sd_layout, orients[k], vpg, pass, y0,
                          y1 - y0, W, H);
            for (std::size_t i = 0; i < vsd.buf.samples.size(); ++i)
                vsd.buf.samples[i] += pass.buf.samples[i];
        }
        for (double& s : vsd.buf.samples) s *= 0.25;
    }
    clamp01(vsd.buf);

    MultiBandImage hrms = aolut_forward(model.aolut, vsd.buf);
    clamp01(hrms);
    for (int b = 0; b < 4; ++b)
        std::memcpy(out.band_ptr(b) + static_cast<std::size_t>(y0) * W,
                    hrms.band_ptr(b),
                    sizeof(double) * static_cast<std::size_t>(y1 - y0) * W);
}

} // namespace

MultiBandImage sharpen(const PanLutModel& model, const MultiBandImage& pan,
                       const MultiBandImage& ms, const SharpenOptions& opts) {
    validate_model(model);
    const int r = infer_ratio(pan, ms);
    MultiBandImage ms_up = upsample_bicubic(ms, r);
    clamp01(ms_up);

    const int H = pan.height;
    const int W = pan.width;
    MultiBandImage out(W, H, 4, ms.source_vmax);
    const int strip = opts.strip_rows > 0 ? opts.strip_rows : H;
    const int n_strips = (H + strip - 1) / strip;
    const int threads = std::max(1, std::min(opts.threads, n_strips));

    if (threads == 1) {
        for (int s = 0; s < n_strips; ++s) {
            const int y0 = s * strip;
            process_strip(model, pan, ms_up, out, y0, std::min(H, y0 + strip));
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int s = next.fetch_add(1); s < n_strips; s = next.fetch_add(1)) {
                    const int y0 = s * strip;
                    process_strip(model, pan, ms_up, out, y0, std::min(H, y0 + strip));
                }
            });
        for (auto& th : pool) th.join();
    }
    return out;
}

void write_model(const std::string& path, const PanLutModel& model) {
    validate_model(model);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write("PANLUTM", 7);
    const unsigned char version = 1;
    const unsigned char mode = static_cast<unsigned char>(model.sd_mode());
    os.write(reinterpret_cast<const char*>(&version), 1);
    os.write(reinterpret_cast<const char*>(&mode), 1);
    const std::uint16_t n = static_cast<std::uint16_t>(model.n_points());
    unsigned char nb[2] = {static_cast<unsigned char>(n & 0xff),
                           static_cast<unsigned char>((n >> 8) & 0xff)};
    os.write(reinterpret_cast<const char*>(nb), 2);
    unsigned char reserved[4] = {0, 0, 0, 0};
    os.write(reinterpret_cast<const char*>(reserved), 4);
    write_plut(os, model.pglut.table, LutKind::Pglut);
    write_plut(os, model.sdlut.table, LutKind::Sdlut);
    write_plut(os, model.aolut.table, LutKind::Aolut);
    if (!os) throw IoError("write failed: " + path);
}

PanLutModel read_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[7];
    is.read(magic, 7);
    if (!is || std::memcmp(magic, "PANLUTM", 7) != 0)
        throw IoError("not a PANLUTM model file: " + path);
    unsigned char version = 0, mode = 0;
    is.read(reinterpret_cast<char*>(&version), 1);
    is.read(reinterpret_cast<char*>(&mode), 1);
    if (version != 1) throw IoError("unsupported model version");
    if (mode > 1) throw IoError("unknown sd_mode in model file");
    unsigned char nb[2];
    is.read(reinterpret_cast<char*>(nb), 2);
    const int n = nb[0] | (nb[1] << 8);
    unsigned char reserved[4];
    is.read(reinterpret_cast<char*>(reserved), 4);
    if (!is) throw IoError("truncated model header: " + path);

    auto [pg, pg_kind] = read_plut(is);
    auto [sd, sd_kind] = read_plut(is);
    auto [ao, ao_kind] = read_plut(is);
    if (pg_kind != LutKind::Pglut || sd_kind != LutKind::Sdlut ||
        ao_kind != LutKind::Aolut)
        throw IoError("model blocks out of order: " + path);
    PanLutModel model{{std::move(pg)},
                      {std::move(sd), static_cast<SdMode>(mode)},
                      {std::move(ao)}};
    validate_model(model);
    if (model.n_points() != n) throw IoError("model header N does not match tables");
    return model;
}

} // namespace panlut
