#include "panlut/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace panlut {

namespace {

void require_same_shape(const MultiBandImage& a, const MultiBandImage& b,
                        const char* op) {
    if (a.width != b.width || a.height != b.height || a.bands != b.bands)
        throw ShapeError(std::string(op) + ": shape mismatch");
}

} // namespace

double psnr(const MultiBandImage& pred, const MultiBandImage& gt) {
    require_same_shape(pred, gt, "psnr");
    double mse = 0.0;
    for (std::size_t i = 0; i < pred.samples.size(); ++i) {
        const double d = pred.samples[i] - gt.samples[i];
        mse += d * d;
    }
    mse /= static_cast<double>(pred.samples.size());
    if (mse == 0.0) return 100.0;
    return std::min(100.0, 10.0 * std::log10(1.0 / mse));
}

namespace {

std::vector<double> ssim_window() {
    // 11x11 Gaussian, sigma 1.5, normalized
    std::vector<double> w(11 * 11);
    double sum = 0.0;
    for (int y = -5; y <= 5; ++y)
        for (int x = -5; x <= 5; ++x) {
            const double v = std::exp(-(x * x + y * y) / (2.0 * 1.5 * 1.5));
            w[(y + 5) * 11 + (x + 5)] = v;
            sum += v;
        }
    for (double& v : w) v /= sum;
    return w;
}

} // namespace

double ssim(const MultiBandImage& pred, const MultiBandImage& gt) {
    require_same_shape(pred, gt, "ssim");
    if (pred.width < 11 || pred.height < 11)
        throw ShapeError("ssim: image smaller than the 11x11 window");
    static const std::vector<double> win = ssim_window();
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    double band_acc = 0.0;
    for (int b = 0; b < pred.bands; ++b) {
        const double* px = pred.band_ptr(b);
        const double* py = gt.band_ptr(b);
        double acc = 0.0;
        std::size_t count = 0;
        for (int cy = 5; cy < pred.height - 5; ++cy) {
            for (int cx = 5; cx < pred.width - 5; ++cx) {
                double mx = 0.0, my = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
                for (int dy = -5; dy <= 5; ++dy)
                    for (int dx = -5; dx <= 5; ++dx) {
                        const double w = win[(dy + 5) * 11 + (dx + 5)];
                        const double x = px[static_cast<std::size_t>(cy + dy) * pred.width + cx + dx];
                        const double y = py[static_cast<std::size_t>(cy + dy) * pred.width + cx + dx];
                        mx += w * x;
                        my += w * y;
                        xx += w * x * x;
                        yy += w * y * y;
                        xy += w * x * y;
                    }
                const double vx = xx - mx * mx;
                const double vy = yy - my * my;
                const double cov = xy - mx * my;
                acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                       ((mx * mx + my * my + c1) * (vx + vy + c2));
                ++count;
            }
        }
        band_acc += acc / static_cast<double>(count);
    }
    return band_acc / pred.bands;
}

double sam(const MultiBandImage& pred, const MultiBandImage& gt) {
    require_same_shape(pred, gt, "sam");
    if (pred.bands < 2) throw ShapeError("sam: needs at least 2 bands");
    const std::size_t plane = pred.plane();
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < plane; ++i) {
        double dot = 0.0, nx = 0.0, ny = 0.0;
        for (int b = 0; b < pred.bands; ++b) {
            const double x = pred.samples[b * plane + i];
            const double y = gt.samples[b * plane + i];
            dot += x * y;
            nx += x * x;
            ny += y * y;
        }
        if (nx == 0.0 || ny == 0.0) continue;
        // compare squared magnitudes first so collinear vectors give an
        // exact 0 (or pi) instead of acos rounding dust
        const double denom2 = nx * ny;
        const double ratio2 = dot * dot / denom2;
        if (ratio2 >= 1.0)
            acc += dot >= 0.0 ? 0.0 : std::acos(-1.0);
        else
            acc += std::acos(dot / std::sqrt(denom2));
        ++count;
    }
    if (count == 0) throw NumericError("sam: undefined, all pixels have a zero spectral vector");
    return acc / static_cast<double>(count);
}

double ergas(const MultiBandImage& pred, const MultiBandImage& gt, int r) {
    require_same_shape(pred, gt, "ergas");
    if (r < 1) throw DomainError("ergas: ratio must be >= 1");
    const std::size_t plane = pred.plane();
    double acc = 0.0;
    for (int b = 0; b < pred.bands; ++b) {
        const double* px = pred.band_ptr(b);
        const double* py = gt.band_ptr(b);
        double mse = 0.0, mean = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
            const double d = px[i] - py[i];
            mse += d * d;
            mean += py[i];
        }
        mse /= static_cast<double>(plane);
        mean /= static_cast<double>(plane);
        if (mean == 0.0)
            throw NumericError("ergas: undefined, band " + std::to_string(b) +
                               " of the reference has zero mean");
        acc += mse / (mean * mean);
    }
    return 100.0 / r * std::sqrt(acc / pred.bands);
}

namespace {

// UIQI over one rectangular block, sample statistics; both-constant blocks
// report Q=1 (detected on the raw samples, not the accumulated variance)
double q_block(const double* x, const double* y, int w, int stride, int h) {
    const double n = static_cast<double>(w) * h;
    double mx = 0.0, my = 0.0;
    double xlo = x[0], xhi = x[0], ylo = y[0], yhi = y[0];
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double xv = x[static_cast<std::size_t>(r) * stride + c];
            const double yv = y[static_cast<std::size_t>(r) * stride + c];
            mx += xv;
            my += yv;
            xlo = std::min(xlo, xv);
            xhi = std::max(xhi, xv);
            ylo = std::min(ylo, yv);
            yhi = std::max(yhi, yv);
        }
    if (xlo == xhi && ylo == yhi) return 1.0;
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double dx = x[static_cast<std::size_t>(r) * stride + c] - mx;
            const double dy = y[static_cast<std::size_t>(r) * stride + c] - my;
            vx += dx * dx;
            vy += dy * dy;
            cov += dx * dy;
        }
    vx /= n - 1.0;
    vy /= n - 1.0;
    cov /= n - 1.0;
    if (vx + vy == 0.0) return 1.0;
    const double lum = (mx * mx + my * my) == 0.0 ? 1.0
                                                  : 2.0 * mx * my / (mx * mx + my * my);
    return lum * (2.0 * cov / (vx + vy));
}

} // namespace

double q_index(const MultiBandImage& a, int band_a, const MultiBandImage& b,
               int band_b, int block) {
    if (a.width != b.width || a.height != b.height)
        throw ShapeError("q_index: operand dimensions differ");
    if (block < 2) throw DomainError("q_index: block must be >= 2");
    const double* pa = a.band_ptr(band_a);
    const double* pb = b.band_ptr(band_b);
    const int bx = a.width / block;
    const int by = a.height / block;
    if (bx == 0 || by == 0)
        return q_block(pa, pb, a.width, a.width, a.height);
    double acc = 0.0;
    for (int j = 0; j < by; ++j)
        for (int i = 0; i < bx; ++i) {
            const std::size_t off = static_cast<std::size_t>(j) * block * a.width +
                                    static_cast<std::size_t>(i) * block;
            acc += q_block(pa + off, pb + off, block, a.width, block);
        }
    return acc / (static_cast<double>(bx) * by);
}

QnrResult qnr_suite(const MultiBandImage& fused, const MultiBandImage& ms_orig,
                    const MultiBandImage& pan, int r, int block) {
    if (fused.bands != ms_orig.bands)
        throw ShapeError("qnr_suite: fused and ms band counts differ");
    if (pan.bands != 1) throw ShapeError("qnr_suite: pan must have 1 band");
    if (fused.width != pan.width || fused.height != pan.height)
        throw ShapeError("qnr_suite: fused must be at PAN resolution");
    if (fused.width != ms_orig.width * r || fused.height != ms_orig.height * r)
        throw ShapeError("qnr_suite: ms must be at 1/r of PAN resolution");
    const int c = fused.bands;
    const int block_red = std::max(2, block / r);

    QnrResult res;
    // spectral: interband Q pattern, fused at full scale vs ms at its own
    double dl = 0.0;
    for (int i = 0; i < c; ++i)
        for (int j = 0; j < c; ++j) {
            if (i == j) continue;
            dl += std::fabs(q_index(fused, i, fused, j, block) -
                            q_index(ms_orig, i, ms_orig, j, block_red));
        }
    res.d_lambda = dl / (static_cast<double>(c) * (c - 1));

    // spatial: each band against PAN at matching scales
    const MultiBandImage pan_low = wald_degrade_one(pan, r);
    double ds = 0.0;
    for (int i = 0; i < c; ++i)
        ds += std::fabs(q_index(fused, i, pan, 0, block) -
                        q_index(ms_orig, i, pan_low, 0, block_red));
    res.d_s = ds / c;

    res.qnr = (1.0 - res.d_lambda) * (1.0 - res.d_s);
    return res;
}

std::string EvalReport::to_json() const {
    nlohmann::ordered_json j;
    if (psnr) j["psnr"] = *psnr;
    if (ssim) j["ssim"] = *ssim;
    if (sam) j["sam"] = *sam;
    if (ergas) j["ergas"] = *ergas;
    if (d_lambda) j["d_lambda"] = *d_lambda;
    if (d_s) j["d_s"] = *d_s;
    if (qnr) j["qnr"] = *qnr;
    return j.dump();
}

std::string EvalReport::to_tsv() const {
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    auto emit = [&](const std::optional<double>& v) {
        if (!v) return;
        if (!first) os << '\t';
        os << *v;
        first = false;
    };
    emit(psnr);
    emit(ssim);
    emit(sam);
    emit(ergas);
    emit(d_lambda);
    emit(d_s);
    emit(qnr);
    return os.str();
}

} // namespace panlut
