#include "panlut/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "panlut/bench.hpp"
#include "panlut/metrics.hpp"
#include "panlut/pipeline.hpp"
#include "panlut/raster_io.hpp"
#include "panlut/synth.hpp"
#include "panlut/training.hpp"

namespace panlut {

namespace {

SdMode parse_sd_mode(const std::string& s) {
    if (s == "chained") return SdMode::Chained;
    if (s == "ensemble") return SdMode::Ensemble;
    throw DomainError("unknown sd-mode '" + s + "' (chained|ensemble)");
}

MsrDtype parse_dtype(const std::string& s) {
    if (s == "u8") return MsrDtype::U8;
    if (s == "u16") return MsrDtype::U16;
    if (s == "f32") return MsrDtype::F32;
    throw DomainError("unknown dtype '" + s + "' (u8|u16|f32)");
}

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("PANLUT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Defaults mirror the training protocol the model ships with.
struct CliConfig {
    int n = 9;
    int r = 4;
    double lambda_s = 1e-4;
    double lambda_m = 10.0;
    int epochs = 1000;
    double lr = 5e-4;
    std::string sd_mode = "chained";
    std::uint64_t seed = 0;
    int threads = 0; // 0: PANLUT_THREADS or all cores
};

void print_config(const CliConfig& c) {
    nlohmann::ordered_json j;
    j["n"] = c.n;
    j["r"] = c.r;
    j["lambda_s"] = c.lambda_s;
    j["lambda_m"] = c.lambda_m;
    j["epochs"] = c.epochs;
    j["lr"] = c.lr;
    j["sd_mode"] = c.sd_mode;
    j["seed"] = c.seed;
    j["threads"] = resolve_threads(c.threads);
    std::cout << j.dump() << "\n";
}

void append_log_line(std::ofstream& os, const EpochLog& e) {
    os << e.epoch << '\t' << e.lr << '\t' << e.loss << '\t' << e.fidelity << '\t'
       << e.smooth << '\t' << e.mono << '\t' << e.psnr << '\n';
    os.flush();
}

struct TrainArgs {
    std::vector<std::string> pan, ms, gt, wald_from;
    std::vector<int> tiles;
    std::string out, log;
    CliConfig cfg;
};

int cmd_train(const TrainArgs& a) {
    const bool have_direct = !a.ms.empty() || !a.gt.empty();
    const bool have_wald = !a.wald_from.empty();
    if (have_direct && have_wald) {
        std::cerr << "train: use either --ms/--gt or --wald-from, not both\n";
        return 1;
    }
    if (!have_wald && (a.ms.empty() || a.gt.empty())) {
        std::cerr << "train: need --ms and --gt, or --wald-from\n";
        return 1;
    }
    if (have_direct && (a.ms.size() != a.pan.size() || a.gt.size() != a.pan.size())) {
        std::cerr << "train: --pan/--ms/--gt counts differ\n";
        return 1;
    }
    if (have_wald && a.wald_from.size() != a.pan.size()) {
        std::cerr << "train: --pan/--wald-from counts differ\n";
        return 1;
    }

    std::vector<TrainPair> pairs;
    for (std::size_t i = 0; i < a.pan.size(); ++i) {
        TrainPair p;
        p.pan = read_msr(a.pan[i]);
        if (have_wald) {
            p.gt = read_msr(a.wald_from[i]);
            p.ms = wald_degrade_one(p.gt, a.cfg.r);
        } else {
            p.ms = read_msr(a.ms[i]);
            p.gt = read_msr(a.gt[i]);
        }
        pairs.push_back(std::move(p));
        if (!a.tiles.empty())
            for (TrainPair& t : make_training_tiles(pairs[pairs.size() - 1], a.tiles))
                pairs.push_back(std::move(t));
    }

    TrainConfig cfg;
    cfg.points = a.cfg.n;
    cfg.epochs = a.cfg.epochs;
    cfg.base_lr = a.cfg.lr;
    cfg.loss.lambda_s = a.cfg.lambda_s;
    cfg.loss.lambda_m = a.cfg.lambda_m;
    cfg.sd_mode = parse_sd_mode(a.cfg.sd_mode);

    const std::string log_path = a.log.empty() ? a.out + ".log" : a.log;
    std::ofstream log_stream(log_path, std::ios::app);
    if (!log_stream) throw IoError("cannot open log for writing: " + log_path);
    log_stream.precision(17);
    cfg.on_epoch = [&log_stream](const EpochLog& e) { append_log_line(log_stream, e); };

    TrainResult result = train(pairs, cfg);
    quantize_to_storage(result.model.pglut.table);
    quantize_to_storage(result.model.sdlut.table);
    quantize_to_storage(result.model.aolut.table);
    write_model(a.out, result.model);
    if (!result.log.empty()) {
        const EpochLog& last = result.log.back();
        std::cout << "trained " << result.log.size() << " epochs, final loss "
                  << last.loss << ", psnr " << last.psnr << "\n";
    } else {
        std::cout << "wrote identity model (0 epochs)\n";
    }
    return 0;
}

struct SharpenArgs {
    std::string model, pan, ms, out, ppm;
    std::string dtype = "f32";
    int strip_rows = 256;
    CliConfig cfg;
};

int cmd_sharpen(const SharpenArgs& a) {
    const PanLutModel model = read_model(a.model);
    const MultiBandImage pan = read_msr(a.pan);
    const MultiBandImage ms = read_msr(a.ms);
    SharpenOptions opts;
    opts.strip_rows = a.strip_rows;
    opts.threads = resolve_threads(a.cfg.threads);
    const MultiBandImage hrms = sharpen(model, pan, ms, opts);
    write_msr(a.out, hrms, parse_dtype(a.dtype));
    if (!a.ppm.empty()) write_ppm(a.ppm, hrms);
    return 0;
}

struct EvalArgs {
    std::string pred, gt, fused, ms, pan;
    std::string json_path;
    bool tsv = false;
    int block = 32;
    CliConfig cfg;
};

int cmd_eval(const EvalArgs& a) {
    const bool reduced = !a.pred.empty() || !a.gt.empty();
    const bool full = !a.fused.empty() || !a.ms.empty() || !a.pan.empty();
    if (reduced == full) {
        std::cerr << "eval: pass --pred/--gt (reduced) or --fused/--ms/--pan (full)\n";
        return 1;
    }
    EvalReport report;
    if (reduced) {
        if (a.pred.empty() || a.gt.empty()) {
            std::cerr << "eval: reduced mode needs both --pred and --gt\n";
            return 1;
        }
        const MultiBandImage pred = read_msr(a.pred);
        const MultiBandImage gt = read_msr(a.gt);
        report.psnr = psnr(pred, gt);
        report.ssim = ssim(pred, gt);
        report.sam = sam(pred, gt);
        report.ergas = ergas(pred, gt, a.cfg.r);
    } else {
        if (a.fused.empty() || a.ms.empty() || a.pan.empty()) {
            std::cerr << "eval: full mode needs --fused, --ms and --pan\n";
            return 1;
        }
        const MultiBandImage fused = read_msr(a.fused);
        const MultiBandImage ms = read_msr(a.ms);
        const MultiBandImage pan = read_msr(a.pan);
        const QnrResult q = qnr_suite(fused, ms, pan, a.cfg.r, a.block);
        report.d_lambda = q.d_lambda;
        report.d_s = q.d_s;
        report.qnr = q.qnr;
    }
    std::cout << (a.tsv ? report.to_tsv() : report.to_json()) << "\n";
    if (!a.json_path.empty()) {
        std::ofstream os(a.json_path);
        if (!os) throw IoError("cannot open for writing: " + a.json_path);
        os << report.to_json() << "\n";
    }
    return 0;
}

struct WaldArgs {
    std::string hrms, pan, out_ms, out_pan;
    std::string dtype = "f32";
    CliConfig cfg;
};

int cmd_wald(const WaldArgs& a) {
    const MultiBandImage hrms = read_msr(a.hrms);
    const MultiBandImage pan = read_msr(a.pan);
    auto [ms_low, pan_low] = wald_degrade(hrms, pan, a.cfg.r);
    const MsrDtype dt = parse_dtype(a.dtype);
    write_msr(a.out_ms, ms_low, dt);
    write_msr(a.out_pan, pan_low, dt);
    return 0;
}

struct SynthArgs {
    int width = 64, height = 64;
    std::string out_hrms, out_pan;
    CliConfig cfg;
};

int cmd_synth(const SynthArgs& a) {
    const SynthScene scene = synth_scene(a.width, a.height, a.cfg.seed);
    write_msr(a.out_hrms, scene.hrms, MsrDtype::F32);
    write_msr(a.out_pan, scene.pan, MsrDtype::F32);
    return 0;
}

struct BenchArgs {
    std::string model;
    std::vector<int> sizes = {256, 512, 1024, 2048};
    bool huge = false;
    int runs = 5;
    std::string out;
    CliConfig cfg;
};

int cmd_bench(const BenchArgs& a) {
    const PanLutModel model = read_model(a.model);
    std::vector<int> sizes = a.sizes;
    if (a.huge) sizes.push_back(9216);
    const auto rows = run_bench(model, sizes, a.cfg.seed, resolve_threads(a.cfg.threads),
                                a.runs);
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!a.out.empty()) {
        file.open(a.out);
        if (!file) throw IoError("cannot open for writing: " + a.out);
        os = &file;
    }
    *os << "size\tmedian_ms\tpeak_mb\n";
    for (const BenchRow& r : rows) {
        if (r.oom)
            *os << r.size << "\tOOM\tOOM\n";
        else
            *os << r.size << '\t' << r.median_ms << '\t' << r.peak_mb << '\n';
    }
    return 0;
}

struct LutArgs {
    std::string in, out;
    std::string kind = "model";
    CliConfig cfg;
};

const char* kind_name(LutKind k) {
    switch (k) {
    case LutKind::Pglut: return "pglut";
    case LutKind::Sdlut: return "sdlut";
    case LutKind::Aolut: return "aolut";
    }
    return "?";
}

void print_table_info(const LutTable& t, LutKind kind) {
    double lo = t.entries.empty() ? 0.0 : t.entries[0];
    double hi = lo, sum = 0.0;
    for (double e : t.entries) {
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        sum += e;
    }
    std::cout << kind_name(kind) << ": dims=" << t.dims << " points=" << t.points
              << " channels=" << t.out_channels << " params=" << t.entries.size()
              << " min=" << lo << " max=" << hi
              << " mean=" << (t.entries.empty() ? 0.0 : sum / t.entries.size()) << "\n";
}

int cmd_lut_inspect(const LutArgs& a) {
    std::ifstream is(a.in, std::ios::binary);
    if (!is) throw IoError("cannot open: " + a.in);
    char magic[7] = {};
    is.read(magic, 4);
    if (std::string(magic, 4) == "PLUT") {
        auto [table, kind] = read_plut_file(a.in);
        print_table_info(table, kind);
        return 0;
    }
    is.close();
    const PanLutModel model = read_model(a.in);
    std::cout << "model: N=" << model.n_points() << " sd_mode="
              << (model.sd_mode() == SdMode::Chained ? "chained" : "ensemble") << "\n";
    print_table_info(model.pglut.table, LutKind::Pglut);
    print_table_info(model.sdlut.table, LutKind::Sdlut);
    print_table_info(model.aolut.table, LutKind::Aolut);
    return 0;
}

int cmd_lut_init(const LutArgs& a) {
    const SdMode mode = parse_sd_mode(a.cfg.sd_mode);
    if (a.kind == "model") {
        write_model(a.out, make_identity_model(a.cfg.n, mode));
    } else if (a.kind == "pglut") {
        write_plut_file(a.out, make_identity_pglut(a.cfg.n).table, LutKind::Pglut);
    } else if (a.kind == "sdlut") {
        write_plut_file(a.out, make_identity_sdlut(a.cfg.n, mode).table, LutKind::Sdlut);
    } else if (a.kind == "aolut") {
        write_plut_file(a.out, make_identity_aolut(a.cfg.n).table, LutKind::Aolut);
    } else {
        std::cerr << "lut init: unknown kind '" << a.kind
                  << "' (pglut|sdlut|aolut|model)\n";
        return 1;
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Pan-LUT pan-sharpening engine"};
    app.require_subcommand(0, 1);

    bool want_config = false;
    app.add_flag("--print-config", want_config, "print resolved defaults as JSON");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a model on (pan, ms, gt) pairs");
    train_cmd->add_option("--pan", train_args.pan, "PAN rasters")->required();
    train_cmd->add_option("--ms", train_args.ms, "low-resolution MS rasters");
    train_cmd->add_option("--gt", train_args.gt, "ground-truth HRMS rasters");
    train_cmd->add_option("--wald-from", train_args.wald_from,
                          "HRMS rasters; MS degraded from them, GT = HRMS");
    train_cmd->add_option("--out", train_args.out, "output model file")->required();
    train_cmd->add_option("--log", train_args.log,
                          "per-epoch TSV log file (default: <out>.log)");
    train_cmd->add_option("--tiles", train_args.tiles,
                          "also train on aligned square crops of these PAN-scale sizes")
        ->delimiter(',');
    train_cmd->add_option("--n", train_args.cfg.n, "lattice points per axis");
    train_cmd->add_option("--r", train_args.cfg.r, "resolution ratio for --wald-from");
    train_cmd->add_option("--epochs", train_args.cfg.epochs, "training epochs");
    train_cmd->add_option("--lr", train_args.cfg.lr, "initial learning rate");
    train_cmd->add_option("--lambda-s", train_args.cfg.lambda_s, "smoothness weight");
    train_cmd->add_option("--lambda-m", train_args.cfg.lambda_m, "monotonicity weight");
    train_cmd->add_option("--sd-mode", train_args.cfg.sd_mode, "chained|ensemble");

    SharpenArgs sharpen_args;
    auto* sharpen_cmd = app.add_subcommand("sharpen", "fuse PAN + MS into HRMS");
    sharpen_cmd->add_option("--model", sharpen_args.model)->required();
    sharpen_cmd->add_option("--pan", sharpen_args.pan)->required();
    sharpen_cmd->add_option("--ms", sharpen_args.ms)->required();
    sharpen_cmd->add_option("--out", sharpen_args.out)->required();
    sharpen_cmd->add_option("--ppm", sharpen_args.ppm, "8-bit RGB preview");
    sharpen_cmd->add_option("--dtype", sharpen_args.dtype, "u8|u16|f32");
    sharpen_cmd->add_option("--strip-rows", sharpen_args.strip_rows);
    sharpen_cmd->add_option("--threads", sharpen_args.cfg.threads);

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "reduced or full-resolution evaluation");
    eval_cmd->add_option("--pred", eval_args.pred);
    eval_cmd->add_option("--gt", eval_args.gt);
    eval_cmd->add_option("--fused", eval_args.fused);
    eval_cmd->add_option("--ms", eval_args.ms);
    eval_cmd->add_option("--pan", eval_args.pan);
    eval_cmd->add_option("--r", eval_args.cfg.r);
    eval_cmd->add_option("--block", eval_args.block, "Q-index block size");
    eval_cmd->add_option("--json", eval_args.json_path, "also write report here");
    eval_cmd->add_flag("--tsv", eval_args.tsv, "print tab-separated values");

    WaldArgs wald_args;
    auto* wald_cmd = app.add_subcommand("wald", "degrade an (hrms, pan) pair by r");
    wald_cmd->add_option("--hrms", wald_args.hrms)->required();
    wald_cmd->add_option("--pan", wald_args.pan)->required();
    wald_cmd->add_option("--r", wald_args.cfg.r);
    wald_cmd->add_option("--out-ms", wald_args.out_ms)->required();
    wald_cmd->add_option("--out-pan", wald_args.out_pan)->required();
    wald_cmd->add_option("--dtype", wald_args.dtype, "u8|u16|f32");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scene");
    synth_cmd->add_option("--width", synth_args.width);
    synth_cmd->add_option("--height", synth_args.height);
    synth_cmd->add_option("--seed", synth_args.cfg.seed);
    synth_cmd->add_option("--out-hrms", synth_args.out_hrms)->required();
    synth_cmd->add_option("--out-pan", synth_args.out_pan)->required();

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "throughput/memory scaling table");
    bench_cmd->add_option("--model", bench_args.model)->required();
    bench_cmd->add_option("--sizes", bench_args.sizes)->delimiter(',');
    bench_cmd->add_flag("--huge", bench_args.huge, "also try 9216^2");
    bench_cmd->add_option("--runs", bench_args.runs);
    bench_cmd->add_option("--seed", bench_args.cfg.seed);
    bench_cmd->add_option("--threads", bench_args.cfg.threads);
    bench_cmd->add_option("--out", bench_args.out, "write TSV here instead of stdout");

    LutArgs lut_args;
    auto* lut_cmd = app.add_subcommand("lut", "inspect or initialize LUT files");
    auto* inspect_cmd = lut_cmd->add_subcommand("inspect", "print table info");
    inspect_cmd->add_option("--in", lut_args.in)->required();
    auto* init_cmd = lut_cmd->add_subcommand("init", "write an identity LUT or model");
    init_cmd->add_option("--kind", lut_args.kind, "pglut|sdlut|aolut|model");
    init_cmd->add_option("--n", lut_args.cfg.n);
    init_cmd->add_option("--sd-mode", lut_args.cfg.sd_mode);
    init_cmd->add_option("--out", lut_args.out)->required();

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("panlut");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (want_config && app.get_subcommands().empty()) {
            print_config(CliConfig{});
            return 0;
        }
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (sharpen_cmd->parsed()) return cmd_sharpen(sharpen_args);
        if (eval_cmd->parsed()) return cmd_eval(eval_args);
        if (wald_cmd->parsed()) return cmd_wald(wald_args);
        if (synth_cmd->parsed()) return cmd_synth(synth_args);
        if (bench_cmd->parsed()) return cmd_bench(bench_args);
        if (lut_cmd->parsed()) {
            if (inspect_cmd->parsed()) return cmd_lut_inspect(lut_args);
            if (init_cmd->parsed()) return cmd_lut_init(lut_args);
            std::cerr << "lut: expected 'inspect' or 'init'\n";
            return 1;
        }
        std::cout << app.help();
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace panlut
