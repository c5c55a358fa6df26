#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "panlut/cli.hpp"
#include "panlut/pipeline.hpp"
#include "panlut/raster_io.hpp"
#include "panlut/synth.hpp"
#include "panlut/training.hpp"

using namespace panlut;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "panlut_cli_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(const std::vector<std::string>& args, std::string* out = nullptr) {
    std::ostringstream captured;
    std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
    const int code = run_cli(args);
    std::cout.rdbuf(old);
    if (out) *out = captured.str();
    return code;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_SUITE_BEGIN("io_cli");

TEST_CASE("print-config reports the stock hyperparameters") {
    std::string out;
    REQUIRE(run({"--print-config"}, &out) == 0);
    const auto j = nlohmann::json::parse(out);
    CHECK(j["n"].get<int>() == 9);
    CHECK(j["r"].get<int>() == 4);
    CHECK(j["lambda_s"].get<double>() == 1e-4);
    CHECK(j["lambda_m"].get<double>() == 10.0);
    CHECK(j["epochs"].get<int>() == 1000);
    CHECK(j["lr"].get<double>() == 5e-4);
    CHECK(j["sd_mode"].get<std::string>() == "chained");
    CHECK(j["seed"].get<std::uint64_t>() == 0);
}

TEST_CASE("synth is seed-deterministic and satisfies its construction") {
    TempDir tmp;
    REQUIRE(run({"synth", "--width", "32", "--height", "32", "--seed", "7",
                 "--out-hrms", tmp / "h1.msr", "--out-pan", tmp / "p1.msr"}) == 0);
    REQUIRE(run({"synth", "--width", "32", "--height", "32", "--seed", "7",
                 "--out-hrms", tmp / "h2.msr", "--out-pan", tmp / "p2.msr"}) == 0);
    CHECK(slurp(tmp / "h1.msr") == slurp(tmp / "h2.msr"));
    CHECK(slurp(tmp / "p1.msr") == slurp(tmp / "p2.msr"));

    const MultiBandImage hrms = read_msr(tmp / "h1.msr");
    const MultiBandImage pan = read_msr(tmp / "p1.msr");
    REQUIRE(hrms.bands == 4);
    REQUIRE(pan.bands == 1);
    for (double s : hrms.samples) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
    for (std::size_t i = 0; i < pan.plane(); ++i) {
        double sum = 0.0;
        for (int b = 0; b < 4; ++b) sum += hrms.samples[b * hrms.plane() + i];
        CHECK(pan.samples[i] ==
              doctest::Approx(std::pow(0.25 * sum, 0.9)).epsilon(1e-6));
    }
}

TEST_CASE("wald subcommand degrades constants to constants") {
    TempDir tmp;
    MultiBandImage hrms(16, 16, 4, 2047);
    std::fill(hrms.samples.begin(), hrms.samples.end(), 0.7);
    MultiBandImage pan(16, 16, 1, 2047);
    std::fill(pan.samples.begin(), pan.samples.end(), 0.4);
    write_msr(tmp / "hrms.msr", hrms, MsrDtype::F32);
    write_msr(tmp / "pan.msr", pan, MsrDtype::F32);
    REQUIRE(run({"wald", "--hrms", tmp / "hrms.msr", "--pan", tmp / "pan.msr", "--r", "4",
                 "--out-ms", tmp / "ms.msr", "--out-pan", tmp / "panlow.msr"}) == 0);
    const MultiBandImage ms = read_msr(tmp / "ms.msr");
    const MultiBandImage pan_low = read_msr(tmp / "panlow.msr");
    CHECK(ms.width == 4);
    CHECK(pan_low.width == 4);
    for (double s : ms.samples) CHECK(s == doctest::Approx(0.7).epsilon(1e-6));
    for (double s : pan_low.samples) CHECK(s == doctest::Approx(0.4).epsilon(1e-6));

    // indivisible dimensions exit with the shape/domain code
    MultiBandImage odd(15, 16, 4, 2047);
    write_msr(tmp / "odd.msr", odd, MsrDtype::F32);
    CHECK(run({"wald", "--hrms", tmp / "odd.msr", "--pan", tmp / "pan.msr", "--r", "4",
               "--out-ms", tmp / "x.msr", "--out-pan", tmp / "y.msr"}) == 3);
}

TEST_CASE("lut init writes identity files that inspect understands") {
    TempDir tmp;
    REQUIRE(run({"lut", "init", "--kind", "model", "--n", "5", "--out",
                 tmp / "id.plm"}) == 0);
    const PanLutModel model = read_model(tmp / "id.plm");
    CHECK(model.n_points() == 5);
    const PanLutModel identity = make_identity_model(5);
    CHECK(model.pglut.table.entries == identity.pglut.table.entries);

    std::string out;
    REQUIRE(run({"lut", "inspect", "--in", tmp / "id.plm"}, &out) == 0);
    CHECK(out.find("pglut") != std::string::npos);
    CHECK(out.find("params=15625") != std::string::npos);

    REQUIRE(run({"lut", "init", "--kind", "sdlut", "--n", "9", "--out",
                 tmp / "sd.plut"}) == 0);
    auto [table, kind] = read_plut_file(tmp / "sd.plut");
    CHECK(kind == LutKind::Sdlut);
    CHECK(table.entries.size() == 6561);
}

TEST_CASE("train with zero epochs writes the identity model") {
    TempDir tmp;
    const SynthScene scene = synth_scene(32, 32, 1);
    write_msr(tmp / "hrms.msr", scene.hrms, MsrDtype::F32);
    write_msr(tmp / "pan.msr", scene.pan, MsrDtype::F32);
    REQUIRE(run({"train", "--pan", tmp / "pan.msr", "--wald-from", tmp / "hrms.msr",
                 "--out", tmp / "model.plm", "--epochs", "0", "--n", "5"}) == 0);
    const PanLutModel model = read_model(tmp / "model.plm");
    const PanLutModel identity = make_identity_model(5);
    CHECK(model.pglut.table.entries == identity.pglut.table.entries);
    CHECK(model.sdlut.table.entries == identity.sdlut.table.entries);
    CHECK(model.aolut.table.entries == identity.aolut.table.entries);
}

TEST_CASE("train demands a ground-truth source") {
    TempDir tmp;
    const SynthScene scene = synth_scene(16, 16, 2);
    write_msr(tmp / "pan.msr", scene.pan, MsrDtype::F32);
    CHECK(run({"train", "--pan", tmp / "pan.msr", "--out", tmp / "m.plm"}) == 1);
}

TEST_CASE("trained model file reproduces the training-loop output bit-exactly") {
    TempDir tmp;
    const SynthScene scene = synth_scene(16, 16, 3);
    const MultiBandImage ms = wald_degrade_one(scene.hrms, 4);
    write_msr(tmp / "pan.msr", scene.pan, MsrDtype::F32);
    write_msr(tmp / "ms.msr", ms, MsrDtype::F32);
    write_msr(tmp / "gt.msr", scene.hrms, MsrDtype::F32);
    REQUIRE(run({"train", "--pan", tmp / "pan.msr", "--ms", tmp / "ms.msr", "--gt",
                 tmp / "gt.msr", "--out", tmp / "model.plm", "--epochs", "3", "--n", "5",
                 "--log", tmp / "train.log"}) == 0);

    // the same loop in-process, quantized to storage precision
    std::vector<TrainPair> pairs(1);
    pairs[0].pan = read_msr(tmp / "pan.msr");
    pairs[0].ms = read_msr(tmp / "ms.msr");
    pairs[0].gt = read_msr(tmp / "gt.msr");
    TrainConfig cfg;
    cfg.points = 5;
    cfg.epochs = 3;
    TrainResult expect = train(pairs, cfg);
    quantize_to_storage(expect.model.pglut.table);
    quantize_to_storage(expect.model.sdlut.table);
    quantize_to_storage(expect.model.aolut.table);

    const PanLutModel loaded = read_model(tmp / "model.plm");
    const MultiBandImage a = sharpen(expect.model, pairs[0].pan, pairs[0].ms);
    const MultiBandImage b = sharpen(loaded, pairs[0].pan, pairs[0].ms);
    CHECK(a.samples == b.samples);

    // log: one tab-separated line per epoch
    std::ifstream log(tmp / "train.log");
    std::string line;
    int lines = 0;
    while (std::getline(log, line)) {
        ++lines;
        CHECK(std::count(line.begin(), line.end(), '\t') == 6);
    }
    CHECK(lines == 3);
}

TEST_CASE("sharpen respects the identity model and is deterministic") {
    TempDir tmp;
    const SynthScene scene = synth_scene(32, 32, 4);
    const MultiBandImage ms = wald_degrade_one(scene.hrms, 4);
    write_msr(tmp / "pan.msr", scene.pan, MsrDtype::F32);
    write_msr(tmp / "ms.msr", ms, MsrDtype::F32);
    REQUIRE(run({"lut", "init", "--kind", "model", "--n", "9", "--out",
                 tmp / "id.plm"}) == 0);

    REQUIRE(run({"sharpen", "--model", tmp / "id.plm", "--pan", tmp / "pan.msr", "--ms",
                 tmp / "ms.msr", "--out", tmp / "out1.msr", "--ppm",
                 tmp / "out1.ppm"}) == 0);
    REQUIRE(run({"sharpen", "--model", tmp / "id.plm", "--pan", tmp / "pan.msr", "--ms",
                 tmp / "ms.msr", "--out", tmp / "out2.msr", "--threads", "3",
                 "--strip-rows", "5"}) == 0);
    CHECK(slurp(tmp / "out1.msr") == slurp(tmp / "out2.msr"));

    const MultiBandImage out = read_msr(tmp / "out1.msr");
    MultiBandImage up = upsample_bicubic(read_msr(tmp / "ms.msr"), 4);
    clamp01(up);
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        CHECK(out.samples[i] == doctest::Approx(up.samples[i]).epsilon(1e-6));

    // ratio mismatch exits with the shape code
    write_msr(tmp / "bad.msr", MultiBandImage(5, 5, 4, 2047), MsrDtype::F32);
    CHECK(run({"sharpen", "--model", tmp / "id.plm", "--pan", tmp / "pan.msr", "--ms",
               tmp / "bad.msr", "--out", tmp / "x.msr"}) == 3);
    // unreadable input exits with the I/O code
    CHECK(run({"sharpen", "--model", tmp / "nope.plm", "--pan", tmp / "pan.msr", "--ms",
               tmp / "ms.msr", "--out", tmp / "x.msr"}) == 2);
}

TEST_CASE("eval reports the documented keys in both modes") {
    TempDir tmp;
    const SynthScene scene = synth_scene(64, 64, 5);
    write_msr(tmp / "a.msr", scene.hrms, MsrDtype::F32);
    REQUIRE(run({"eval", "--pred", tmp / "a.msr", "--gt", tmp / "a.msr", "--json",
                 tmp / "report.json"}) == 0);
    const auto j = nlohmann::json::parse(slurp(tmp / "report.json"));
    CHECK(j["psnr"].get<double>() == 100.0);
    CHECK(j["ssim"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j["sam"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(j["ergas"].get<double>() == 0.0);

    // constant full-resolution scene: QNR is exactly 1
    MultiBandImage fused(64, 64, 4, 2047), cms(16, 16, 4, 2047), cpan(64, 64, 1, 2047);
    for (int b = 0; b < 4; ++b) {
        std::fill(fused.band_ptr(b), fused.band_ptr(b) + fused.plane(), 0.2 + 0.1 * b);
        std::fill(cms.band_ptr(b), cms.band_ptr(b) + cms.plane(), 0.2 + 0.1 * b);
    }
    std::fill(cpan.samples.begin(), cpan.samples.end(), 0.5);
    write_msr(tmp / "fused.msr", fused, MsrDtype::F32);
    write_msr(tmp / "cms.msr", cms, MsrDtype::F32);
    write_msr(tmp / "cpan.msr", cpan, MsrDtype::F32);
    REQUIRE(run({"eval", "--fused", tmp / "fused.msr", "--ms", tmp / "cms.msr", "--pan",
                 tmp / "cpan.msr", "--json", tmp / "full.json"}) == 0);
    const auto jf = nlohmann::json::parse(slurp(tmp / "full.json"));
    CHECK(jf["qnr"].get<double>() == 1.0);
    CHECK(jf["d_lambda"].get<double>() == 0.0);
    CHECK(jf["d_s"].get<double>() == 0.0);

    // mixing the two modes is a usage error
    CHECK(run({"eval", "--pred", tmp / "a.msr", "--fused", tmp / "fused.msr"}) == 1);
}

TEST_CASE("bench runs tiny sizes and emits the table") {
    TempDir tmp;
    REQUIRE(run({"lut", "init", "--kind", "model", "--n", "3", "--out",
                 tmp / "id.plm"}) == 0);
    std::string out;
    REQUIRE(run({"bench", "--model", tmp / "id.plm", "--sizes", "8,16", "--runs", "1",
                 "--threads", "1"}, &out) == 0);
    CHECK(out.find("size\tmedian_ms\tpeak_mb") != std::string::npos);
    CHECK(out.find("\n8\t") != std::string::npos);
    CHECK(out.find("\n16\t") != std::string::npos);
}

TEST_SUITE_END();
