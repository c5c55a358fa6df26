#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "panlut/pipeline.hpp"
#include "panlut/synth.hpp"
#include "panlut/training.hpp"

using namespace panlut;

namespace {

PanLutModel random_model(int points, SdMode mode, Rng& rng, double lo = 0.0,
                         double hi = 1.0) {
    PanLutModel m = make_identity_model(points, mode);
    for (auto* t : {&m.pglut.table, &m.sdlut.table, &m.aolut.table})
        for (double& e : t->entries) e = rng.uniform(lo, hi);
    return m;
}

PanLutModel jittered_identity(int points, SdMode mode, Rng& rng, double amp) {
    PanLutModel m = make_identity_model(points, mode);
    for (auto* t : {&m.pglut.table, &m.sdlut.table, &m.aolut.table})
        for (double& e : t->entries) e += rng.uniform(-amp, amp);
    return m;
}

double max_abs_diff(const MultiBandImage& a, const MultiBandImage& b) {
    REQUIRE(a.samples.size() == b.samples.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        m = std::max(m, std::fabs(a.samples[i] - b.samples[i]));
    return m;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("identity model sharpen equals the clamped bicubic upsample") {
    Rng rng(41);
    const MultiBandImage ms = random_image(8, 8, 4, rng);
    const MultiBandImage pan = random_image(32, 32, 1, rng);
    const PanLutModel model = make_identity_model(9);
    const MultiBandImage out = sharpen(model, pan, ms);
    MultiBandImage up = upsample_bicubic(ms, 4);
    clamp01(up);
    CHECK(max_abs_diff(out, up) < 1e-6);
}

TEST_CASE("constant inputs produce spatially constant output") {
    Rng rng(42);
    const PanLutModel model = random_model(9, SdMode::Chained, rng);
    MultiBandImage ms(4, 4, 4), pan(16, 16, 1);
    for (int b = 0; b < 4; ++b)
        for (std::size_t i = 0; i < ms.plane(); ++i) ms.band_ptr(b)[i] = 0.2 + 0.15 * b;
    for (double& s : pan.samples) s = 0.6;
    const MultiBandImage out = sharpen(model, pan, ms);
    // constant up to per-phase interpolation rounding
    for (int b = 0; b < 4; ++b)
        for (std::size_t i = 0; i < out.plane(); ++i)
            CHECK(out.band_ptr(b)[i] == doctest::Approx(out.band_ptr(b)[0]).epsilon(1e-12));
}

TEST_CASE("sharpen equals the hand-composed stage chain bit for bit") {
    Rng rng(43);
    for (SdMode mode : {SdMode::Chained, SdMode::Ensemble}) {
        const PanLutModel model = random_model(9, mode, rng);
        const MultiBandImage ms = random_image(2, 2, 4, rng);
        const MultiBandImage pan = random_image(8, 8, 1, rng);

        MultiBandImage up = upsample_bicubic(ms, 4);
        clamp01(up);
        MultiBandImage v = pglut_forward(model.pglut, concat_bands(pan, up));
        clamp01(v);
        v = sdlut_forward(model.sdlut, v);
        clamp01(v);
        MultiBandImage expect = aolut_forward(model.aolut, v);
        clamp01(expect);

        const MultiBandImage got = sharpen(model, pan, ms);
        CHECK(max_abs_diff(got, expect) == 0.0);
    }
}

TEST_CASE("sharpen output always lies in [0,1]") {
    Rng rng(44);
    // entries well outside the nominal range
    const PanLutModel model = random_model(9, SdMode::Chained, rng, -0.8, 1.8);
    const MultiBandImage ms = random_image(4, 4, 4, rng);
    const MultiBandImage pan = random_image(16, 16, 1, rng);
    const MultiBandImage out = sharpen(model, pan, ms);
    for (double s : out.samples) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("sharpen is bitwise stable across strip sizes and thread counts") {
    Rng rng(45);
    for (SdMode mode : {SdMode::Chained, SdMode::Ensemble}) {
        const PanLutModel model = random_model(9, mode, rng);
        const MultiBandImage ms = random_image(16, 13, 4, rng);
        const MultiBandImage pan = random_image(64, 52, 1, rng);
        const MultiBandImage whole = sharpen(model, pan, ms, {0, 1});
        const int strip_sizes[] = {3, 7, 16, 52, 256};
        for (int rows : strip_sizes) {
            for (int threads : {1, 2, 4}) {
                const MultiBandImage out = sharpen(model, pan, ms, {rows, threads});
                CHECK(out.samples == whole.samples);
            }
        }
        // repeated runs are identical
        CHECK(sharpen(model, pan, ms).samples == sharpen(model, pan, ms).samples);
    }
}

TEST_CASE("sharpen rejects non-integer resolution ratios") {
    Rng rng(46);
    const PanLutModel model = make_identity_model(5);
    CHECK_THROWS_AS(
        sharpen(model, random_image(10, 8, 1, rng), random_image(3, 2, 4, rng)),
        ShapeError);
    CHECK_THROWS_AS(
        sharpen(model, random_image(8, 8, 2, rng), random_image(2, 2, 4, rng)),
        ShapeError);
}

TEST_CASE("forward with tape matches forward without") {
    Rng rng(47);
    const PanLutModel model = random_model(9, SdMode::Chained, rng);
    const MultiBandImage pm = random_image(6, 6, 5, rng);
    GradientTape tape;
    const MultiBandImage with_tape = model_forward(model, pm, &tape);
    const MultiBandImage without = model_forward(model, pm, nullptr);
    CHECK(with_tape.samples == without.samples);
    CHECK(tape.pg.queries.size() == pm.plane());
    CHECK(tape.clamp_final.size() == with_tape.samples.size());
}

TEST_CASE("forward_backward reports zero fidelity against its own output") {
    Rng rng(48);
    const PanLutModel model = make_identity_model(9);
    const MultiBandImage ms = random_image(4, 4, 4, rng);
    const MultiBandImage pan = random_image(16, 16, 1, rng);
    MultiBandImage gt = upsample_bicubic(ms, 4);
    clamp01(gt);

    LossConfig cfg;
    cfg.lambda_s = 0.0;
    cfg.lambda_m = 0.0;
    const auto fb = forward_backward(model, pan, ms, gt, cfg);
    CHECK(fb.loss.fidelity < 1e-12);
    CHECK(fb.loss.total < 1e-12);
    for (double g : fb.grads.pg) CHECK(std::fabs(g) < 1e-12);
    for (double g : fb.grads.sd) CHECK(std::fabs(g) < 1e-12);
    for (double g : fb.grads.ao) CHECK(std::fabs(g) < 1e-12);
}

TEST_CASE("fidelity gradients are additive over a two-image batch") {
    Rng rng(49);
    const PanLutModel model = jittered_identity(5, SdMode::Chained, rng, 0.01);
    LossConfig cfg;
    cfg.lambda_s = 0.0;
    cfg.lambda_m = 0.0;

    // inputs kept away from the clamp boundaries
    auto shrink = [](MultiBandImage img) {
        for (double& s : img.samples) s = 0.1 + 0.8 * s;
        return img;
    };
    TrainPair a{shrink(random_image(4, 4, 1, rng)), shrink(random_image(4, 4, 4, rng)),
                shrink(random_image(4, 4, 4, rng))};
    TrainPair b{shrink(random_image(4, 4, 1, rng)), shrink(random_image(4, 4, 4, rng)),
                shrink(random_image(4, 4, 4, rng))};

    const auto fa = forward_backward(model, a.pan, a.ms, a.gt, cfg);
    const auto fb = forward_backward(model, b.pan, b.ms, b.gt, cfg);

    // sum of per-image gradients == gradient of the summed loss (FD spot check)
    PanLutModel probe = model;
    const double h = 1e-6;
    auto batch_loss = [&](const PanLutModel& m) {
        const auto ra = forward_backward(m, a.pan, a.ms, a.gt, cfg);
        const auto rb = forward_backward(m, b.pan, b.ms, b.gt, cfg);
        return ra.loss.total + rb.loss.total;
    };
    int checked = 0;
    for (std::size_t i = 0; i < fa.grads.pg.size() && checked < 8; i += 977) {
        const double g = fa.grads.pg[i] + fb.grads.pg[i];
        if (g == 0.0) continue;
        const double keep = probe.pglut.table.entries[i];
        probe.pglut.table.entries[i] = keep + h;
        const double up = batch_loss(probe);
        probe.pglut.table.entries[i] = keep - h;
        const double dn = batch_loss(probe);
        probe.pglut.table.entries[i] = keep;
        CHECK(g == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-3));
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("model container round-trips byte-identically") {
    Rng rng(50);
    const PanLutModel model = random_model(5, SdMode::Ensemble, rng);
    write_model("test_model.plm", model);
    const PanLutModel loaded = read_model("test_model.plm");
    CHECK(loaded.n_points() == 5);
    CHECK(loaded.sd_mode() == SdMode::Ensemble);
    write_model("test_model2.plm", loaded);
    CHECK(slurp("test_model.plm") == slurp("test_model2.plm"));
    std::remove("test_model.plm");
    std::remove("test_model2.plm");
}

TEST_SUITE_END();
