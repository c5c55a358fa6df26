#include <doctest.h>

#include <cmath>
#include <set>

#include <json.hpp>

#include "panlut/metrics.hpp"
#include "panlut/synth.hpp"

using namespace panlut;

namespace {

MultiBandImage constant_image(int w, int h, int bands, double v) {
    MultiBandImage img(w, h, bands);
    std::fill(img.samples.begin(), img.samples.end(), v);
    return img;
}

MultiBandImage add_noise(const MultiBandImage& img, double amp, Rng& rng) {
    MultiBandImage out = img;
    for (double& s : out.samples) {
        s += rng.uniform(-amp, amp);
        if (s < 0.0) s = 0.0;
        if (s > 1.0) s = 1.0;
    }
    return out;
}

// direct UIQI over one block, written independently of the library path
double oracle_q_block(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
        cov += (x[i] - mx) * (y[i] - my);
    }
    vx /= n - 1;
    vy /= n - 1;
    cov /= n - 1;
    if (vx + vy == 0.0) return 1.0;
    const double lum = (mx * mx + my * my) == 0.0 ? 1.0
                                                  : 2.0 * mx * my / (mx * mx + my * my);
    return lum * 2.0 * cov / (vx + vy);
}

double oracle_q(const MultiBandImage& a, int ba, const MultiBandImage& b, int bb,
                int block) {
    const int nx = a.width / block, ny = a.height / block;
    double acc = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            std::vector<double> x, y;
            for (int r = 0; r < block; ++r)
                for (int c = 0; c < block; ++c) {
                    x.push_back(a.at(ba, i * block + c, j * block + r));
                    y.push_back(b.at(bb, i * block + c, j * block + r));
                }
            acc += oracle_q_block(x, y);
        }
    return acc / (nx * ny);
}

} // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("psnr: cap, closed form and oracle") {
    Rng rng(81);
    const MultiBandImage a = random_image(12, 12, 4, rng);
    CHECK(psnr(a, a) == 100.0);

    MultiBandImage b = constant_image(12, 12, 4, 0.3);
    MultiBandImage c = constant_image(12, 12, 4, 0.4);
    CHECK(psnr(c, b) == doctest::Approx(20.0).epsilon(1e-9));

    const MultiBandImage d = random_image(12, 12, 4, rng);
    double mse = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const double diff = a.samples[i] - d.samples[i];
        mse += diff * diff;
    }
    mse /= a.samples.size();
    CHECK(psnr(a, d) == doctest::Approx(10.0 * std::log10(1.0 / mse)).epsilon(1e-9));
    CHECK_THROWS_AS(psnr(a, random_image(5, 5, 4, rng)), ShapeError);
}

TEST_CASE("ssim: identity, anticorrelation and windowed oracle") {
    Rng rng(82);
    const MultiBandImage a = random_image(16, 14, 2, rng);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    // checkerboard vs inverted checkerboard
    MultiBandImage board(16, 16, 1);
    MultiBandImage inv(16, 16, 1);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const double v = (x + y) % 2 ? 1.0 : 0.0;
            board.at(0, x, y) = v;
            inv.at(0, x, y) = 1.0 - v;
        }
    CHECK(ssim(inv, board) < 0.0);

    // independent direct-formula oracle at a few window positions
    const MultiBandImage b = random_image(16, 14, 2, rng);
    double w[11][11], wsum = 0.0;
    for (int y = -5; y <= 5; ++y)
        for (int x = -5; x <= 5; ++x) {
            w[y + 5][x + 5] = std::exp(-(x * x + y * y) / 4.5);
            wsum += w[y + 5][x + 5];
        }
    double band_acc = 0.0;
    for (int band = 0; band < 2; ++band) {
        double acc = 0.0;
        int count = 0;
        for (int cy = 5; cy < 14 - 5; ++cy)
            for (int cx = 5; cx < 16 - 5; ++cx) {
                double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
                for (int dy = -5; dy <= 5; ++dy)
                    for (int dx = -5; dx <= 5; ++dx) {
                        const double wt = w[dy + 5][dx + 5] / wsum;
                        const double xv = a.at(band, cx + dx, cy + dy);
                        const double yv = b.at(band, cx + dx, cy + dy);
                        mx += wt * xv;
                        my += wt * yv;
                        xx += wt * xv * xv;
                        yy += wt * yv * yv;
                        xy += wt * xv * yv;
                    }
                const double c1 = 1e-4, c2 = 9e-4;
                acc += (2 * mx * my + c1) * (2 * (xy - mx * my) + c2) /
                       ((mx * mx + my * my + c1) *
                        ((xx - mx * mx) + (yy - my * my) + c2));
                ++count;
            }
        band_acc += acc / count;
    }
    CHECK(ssim(a, b) == doctest::Approx(band_acc / 2).epsilon(1e-9));

    CHECK_THROWS_AS(ssim(random_image(8, 8, 1, rng), random_image(8, 8, 1, rng)),
                    ShapeError);
}

TEST_CASE("sam: identity, scale invariance, skip rule and oracle") {
    Rng rng(83);
    MultiBandImage a = random_image(6, 6, 4, rng);
    for (double& s : a.samples) s += 0.05; // keep vectors nonzero
    CHECK(sam(a, a) == doctest::Approx(0.0).epsilon(1e-12));

    MultiBandImage doubled = a;
    for (double& s : doubled.samples) s *= 2.0;
    CHECK(sam(doubled, a) == doctest::Approx(0.0).epsilon(1e-9));

    const MultiBandImage b = random_image(6, 6, 4, rng);
    double acc = 0.0;
    int count = 0;
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) {
            double dot = 0, na = 0, nb = 0;
            for (int band = 0; band < 4; ++band) {
                dot += a.at(band, x, y) * b.at(band, x, y);
                na += a.at(band, x, y) * a.at(band, x, y);
                nb += b.at(band, x, y) * b.at(band, x, y);
            }
            acc += std::acos(std::min(1.0, std::max(-1.0, dot / std::sqrt(na * nb))));
            ++count;
        }
    CHECK(sam(a, b) == doctest::Approx(acc / count).epsilon(1e-9));

    CHECK_THROWS_AS(sam(constant_image(4, 4, 4, 0.0), constant_image(4, 4, 4, 0.0)),
                    NumericError);
}

TEST_CASE("ergas: identity, closed form, oracle and asymmetry") {
    Rng rng(84);
    MultiBandImage gt = random_image(8, 8, 4, rng);
    for (double& s : gt.samples) s += 0.1;
    CHECK(ergas(gt, gt, 4) == 0.0);

    const MultiBandImage c05 = constant_image(8, 8, 1, 0.5);
    const MultiBandImage c055 = constant_image(8, 8, 1, 0.55);
    CHECK(ergas(c055, c05, 4) == doctest::Approx(2.5).epsilon(1e-9));

    const MultiBandImage pred = random_image(8, 8, 4, rng);
    double acc = 0.0;
    for (int b = 0; b < 4; ++b) {
        double mse = 0.0, mean = 0.0;
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                const double d = pred.at(b, x, y) - gt.at(b, x, y);
                mse += d * d;
                mean += gt.at(b, x, y);
            }
        mse /= 64.0;
        mean /= 64.0;
        acc += mse / (mean * mean);
    }
    CHECK(ergas(pred, gt, 4) == doctest::Approx(25.0 * std::sqrt(acc / 4)).epsilon(1e-9));

    // normalizes by the reference: not symmetric
    CHECK(ergas(pred, gt, 4) != ergas(gt, pred, 4));
    CHECK_THROWS_AS(ergas(pred, constant_image(8, 8, 4, 0.0), 4), NumericError);
}

TEST_CASE("qnr: constant scenes give Q=1 everywhere and QNR 1") {
    MultiBandImage fused(64, 64, 4), ms(16, 16, 4), pan(64, 64, 1);
    for (int b = 0; b < 4; ++b) {
        std::fill(fused.band_ptr(b), fused.band_ptr(b) + fused.plane(), 0.2 + 0.1 * b);
        std::fill(ms.band_ptr(b), ms.band_ptr(b) + ms.plane(), 0.2 + 0.1 * b);
    }
    std::fill(pan.samples.begin(), pan.samples.end(), 0.5);
    const QnrResult r = qnr_suite(fused, ms, pan, 4);
    CHECK(r.d_lambda == 0.0);
    CHECK(r.d_s == 0.0);
    CHECK(r.qnr == 1.0);
}

TEST_CASE("qnr identity and structural bounds hold on random scenes") {
    Rng rng(85);
    for (int trial = 0; trial < 50; ++trial) {
        const MultiBandImage fused = random_image(64, 64, 4, rng);
        const MultiBandImage ms = random_image(16, 16, 4, rng);
        const MultiBandImage pan = random_image(64, 64, 1, rng);
        const QnrResult r = qnr_suite(fused, ms, pan, 4);
        CHECK(r.qnr ==
              doctest::Approx((1.0 - r.d_lambda) * (1.0 - r.d_s)).epsilon(1e-12));
        CHECK(r.d_lambda >= 0.0);
        CHECK(r.d_lambda <= 2.0);
        CHECK(r.d_s >= 0.0);
        CHECK(r.d_s <= 2.0);
    }
}

TEST_CASE("qnr matches the brute-force block-Q oracle") {
    Rng rng(86);
    const MultiBandImage fused = random_image(64, 64, 4, rng);
    const MultiBandImage ms = random_image(16, 16, 4, rng);
    const MultiBandImage pan = random_image(64, 64, 1, rng);
    const QnrResult r = qnr_suite(fused, ms, pan, 4, 32);

    double dl = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            dl += std::fabs(oracle_q(fused, i, fused, j, 32) - oracle_q(ms, i, ms, j, 8));
        }
    dl /= 12.0;
    CHECK(r.d_lambda == doctest::Approx(dl).epsilon(1e-9));

    const MultiBandImage pan_low = wald_degrade_one(pan, 4);
    double ds = 0.0;
    for (int i = 0; i < 4; ++i)
        ds += std::fabs(oracle_q(fused, i, pan, 0, 32) - oracle_q(ms, i, pan_low, 0, 8));
    ds /= 4.0;
    CHECK(r.d_s == doctest::Approx(ds).epsilon(1e-9));
}

TEST_CASE("metrics respond monotonically to increasing noise") {
    Rng rng(87);
    MultiBandImage gt = random_image(24, 24, 4, rng);
    for (double& s : gt.samples) s = 0.2 + 0.6 * s;
    const double amps[3] = {0.01, 0.05, 0.15};
    double last_psnr = 1e9, last_ssim = 2.0, last_sam = -1.0, last_ergas = -1.0;
    for (double amp : amps) {
        Rng noise_rng(99);
        const MultiBandImage noisy = add_noise(gt, amp, noise_rng);
        const double p = psnr(noisy, gt);
        const double s = ssim(noisy, gt);
        const double a = sam(noisy, gt);
        const double e = ergas(noisy, gt, 4);
        CHECK(p < last_psnr);
        CHECK(s < last_ssim);
        CHECK(a > last_sam);
        CHECK(e > last_ergas);
        last_psnr = p;
        last_ssim = s;
        last_sam = a;
        last_ergas = e;
    }
}

TEST_CASE("EvalReport serializes with the documented keys") {
    EvalReport r;
    r.psnr = 31.5;
    r.ssim = 0.93;
    r.sam = 0.04;
    r.ergas = 2.1;
    const auto j = nlohmann::json::parse(r.to_json());
    std::set<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.insert(it.key());
    CHECK(keys == std::set<std::string>{"psnr", "ssim", "sam", "ergas"});
    CHECK(j["psnr"].get<double>() == 31.5);

    EvalReport full;
    full.d_lambda = 0.05;
    full.d_s = 0.06;
    full.qnr = (1 - 0.05) * (1 - 0.06);
    const auto jf = nlohmann::json::parse(full.to_json());
    std::set<std::string> fkeys;
    for (auto it = jf.begin(); it != jf.end(); ++it) fkeys.insert(it.key());
    CHECK(fkeys == std::set<std::string>{"d_lambda", "d_s", "qnr"});
    CHECK(full.to_tsv().find('\t') != std::string::npos);
}

TEST_SUITE_END();
