#include "panlut/training.hpp"

#include <cmath>

namespace panlut {

double loss_fidelity(const MultiBandImage& pred, const MultiBandImage& gt) {
    if (pred.width != gt.width || pred.height != gt.height || pred.bands != gt.bands)
        throw ShapeError("loss_fidelity: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.samples.size(); ++i) {
        const double d = pred.samples[i] - gt.samples[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.samples.size());
}

namespace {

// iterates the flat positions whose axis-l index is < N-1; `fn(f, f + s)`
// receives each forward-difference pair
template <typename Fn>
void for_each_forward_pair(const LutTable& t, int axis, Fn&& fn) {
    const std::size_t s = t.axis_stride(axis);
    const std::size_t n = static_cast<std::size_t>(t.points);
    const std::size_t block = s * n;
    const std::size_t total = t.entries.size();
    for (std::size_t b = 0; b < total; b += block)
        for (std::size_t o = 0; o < s * (n - 1); ++o) fn(b + o, b + o + s);
}

} // namespace

double loss_smooth(const LutTable& table) {
    double acc = 0.0;
    const double* e = table.entries.data();
    for (int axis = 0; axis < table.dims; ++axis)
        for_each_forward_pair(table, axis, [&](std::size_t lo, std::size_t hi) {
            const double d = e[hi] - e[lo];
            acc += d * d;
        });
    return acc;
}

double loss_mono(const LutTable& table) {
    double acc = 0.0;
    const double* e = table.entries.data();
    for (int axis = 0; axis < table.dims; ++axis)
        for_each_forward_pair(table, axis, [&](std::size_t lo, std::size_t hi) {
            const double d = e[lo] - e[hi];
            if (d > 0.0) acc += d;
        });
    return acc;
}

double loss_total(const MultiBandImage& pred, const MultiBandImage& gt,
                  const PanLutModel& model, const LossConfig& cfg) {
    const double s = loss_smooth(model.pglut.table) + loss_smooth(model.sdlut.table) +
                     loss_smooth(model.aolut.table);
    const double m = loss_mono(model.pglut.table) + loss_mono(model.sdlut.table) +
                     loss_mono(model.aolut.table);
    return loss_fidelity(pred, gt) + cfg.lambda_s * s + cfg.lambda_m * m;
}

void loss_smooth_grad(const LutTable& table, double scale, std::vector<double>& grad) {
    if (grad.size() != table.entries.size())
        throw ShapeError("loss_smooth_grad: accumulator shape mismatch");
    const double* e = table.entries.data();
    double* g = grad.data();
    for (int axis = 0; axis < table.dims; ++axis)
        for_each_forward_pair(table, axis, [&](std::size_t lo, std::size_t hi) {
            const double d = 2.0 * scale * (e[hi] - e[lo]);
            g[hi] += d;
            g[lo] -= d;
        });
}

void loss_mono_grad(const LutTable& table, double scale, std::vector<double>& grad) {
    if (grad.size() != table.entries.size())
        throw ShapeError("loss_mono_grad: accumulator shape mismatch");
    const double* e = table.entries.data();
    double* g = grad.data();
    for (int axis = 0; axis < table.dims; ++axis)
        for_each_forward_pair(table, axis, [&](std::size_t lo, std::size_t hi) {
            if (e[lo] - e[hi] > 0.0) {
                g[lo] += scale;
                g[hi] -= scale;
            }
        });
}

ForwardBackwardResult forward_backward(const PanLutModel& model,
                                       const MultiBandImage& pan,
                                       const MultiBandImage& ms,
                                       const MultiBandImage& gt,
                                       const LossConfig& cfg) {
    if (gt.bands != 4 || gt.width != pan.width || gt.height != pan.height)
        throw ShapeError("forward_backward: ground truth must be 4 bands at PAN size");
    MultiBandImage pm = assemble_pm(pan, ms);
    GradientTape tape;
    ForwardBackwardResult res;
    res.pred = model_forward(model, pm, &tape);

    // The optimization objective uses the squared-error sum over samples;
    // the regularizer weights are calibrated against that scale. The
    // fidelity field reports the per-sample mean.
    const std::size_t n = res.pred.samples.size();
    double sq_sum = 0.0;
    MultiBandImage dpred(res.pred.width, res.pred.height, 4, res.pred.source_vmax);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = res.pred.samples[i] - gt.samples[i];
        sq_sum += d * d;
        dpred.samples[i] = tape.clamp_final[i] ? 0.0 : 2.0 * d;
    }

    res.grads.pg.assign(model.pglut.table.entries.size(), 0.0);
    res.grads.sd.assign(model.sdlut.table.entries.size(), 0.0);
    res.grads.ao.assign(model.aolut.table.entries.size(), 0.0);

    MultiBandImage dvsd = aolut_backward(model.aolut, tape.ao, dpred, res.grads.ao);
    for (std::size_t i = 0; i < dvsd.samples.size(); ++i)
        if (tape.clamp_sd[i]) dvsd.samples[i] = 0.0;
    MultiBandImage dvpg = sdlut_backward(model.sdlut, tape.sd, dvsd, res.grads.sd);
    for (std::size_t i = 0; i < dvpg.samples.size(); ++i)
        if (tape.clamp_pg[i]) dvpg.samples[i] = 0.0;
    res.pm_grad = pglut_backward(model.pglut, tape.pg, dvpg, res.grads.pg);

    const double smooth = loss_smooth(model.pglut.table) + loss_smooth(model.sdlut.table) +
                          loss_smooth(model.aolut.table);
    const double mono = loss_mono(model.pglut.table) + loss_mono(model.sdlut.table) +
                        loss_mono(model.aolut.table);
    loss_smooth_grad(model.pglut.table, cfg.lambda_s, res.grads.pg);
    loss_smooth_grad(model.sdlut.table, cfg.lambda_s, res.grads.sd);
    loss_smooth_grad(model.aolut.table, cfg.lambda_s, res.grads.ao);
    loss_mono_grad(model.pglut.table, cfg.lambda_m, res.grads.pg);
    loss_mono_grad(model.sdlut.table, cfg.lambda_m, res.grads.sd);
    loss_mono_grad(model.aolut.table, cfg.lambda_m, res.grads.ao);

    res.loss.fidelity = sq_sum / static_cast<double>(n);
    res.loss.smooth = smooth;
    res.loss.mono = mono;
    res.loss.total = sq_sum + cfg.lambda_s * smooth + cfg.lambda_m * mono;
    return res;
}

double scheduled_lr(double base_lr, long long epoch, int every) {
    if (every < 1) return base_lr;
    return std::ldexp(base_lr, -static_cast<int>(epoch / every));
}

ParamVector model_params(PanLutModel& model, const ModelGrads& grads) {
    ParamVector pv;
    pv.parts = {model.pglut.table.entries.data(), model.sdlut.table.entries.data(),
                model.aolut.table.entries.data()};
    pv.grads = {grads.pg.data(), grads.sd.data(), grads.ao.data()};
    pv.sizes = {grads.pg.size(), grads.sd.size(), grads.ao.size()};
    return pv;
}

void adam_step(const ParamVector& pv, OptimState& state, double lr) {
    const std::size_t total = pv.sizes[0] + pv.sizes[1] + pv.sizes[2];
    if (state.m.empty()) {
        state.m.assign(total, 0.0);
        state.v.assign(total, 0.0);
    } else if (state.m.size() != total) {
        throw ShapeError("adam_step: moment vectors do not match parameter count");
    }
    state.step += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    std::size_t off = 0;
    for (int part = 0; part < 3; ++part) {
        double* p = pv.parts[part];
        const double* g = pv.grads[part];
        for (std::size_t i = 0; i < pv.sizes[part]; ++i) {
            const double gi = g[i];
            if (!std::isfinite(gi))
                throw NumericError("adam_step: non-finite gradient at parameter " +
                                   std::to_string(off + i));
            double& m = state.m[off + i];
            double& v = state.v[off + i];
            m = b1 * m + (1.0 - b1) * gi;
            v = b2 * v + (1.0 - b2) * gi * gi;
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
        off += pv.sizes[part];
    }
}

void adam_step(double* params, const double* grads, std::size_t n,
               OptimState& state, double lr) {
    ParamVector pv;
    pv.parts = {params, nullptr, nullptr};
    pv.grads = {grads, nullptr, nullptr};
    pv.sizes = {n, 0, 0};
    adam_step(pv, state, lr);
}

namespace {

MultiBandImage crop_image(const MultiBandImage& img, int x0, int y0, int w, int h) {
    MultiBandImage out(w, h, img.bands, img.source_vmax);
    for (int b = 0; b < img.bands; ++b)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.at(b, x, y) = img.at(b, x0 + x, y0 + y);
    return out;
}

} // namespace

std::vector<TrainPair> make_training_tiles(const TrainPair& pair,
                                           const std::vector<int>& tile_sizes) {
    if (pair.pan.bands != 1 || pair.ms.bands != 4)
        throw ShapeError("make_training_tiles: expected 1-band PAN and 4-band MS");
    if (pair.ms.width < 1 || pair.pan.width % pair.ms.width != 0)
        throw ShapeError("make_training_tiles: PAN/MS ratio is not an integer");
    const int r = pair.pan.width / pair.ms.width;
    std::vector<TrainPair> tiles;
    for (int tile : tile_sizes) {
        if (tile < r || tile % r != 0)
            throw ShapeError("make_training_tiles: tile " + std::to_string(tile) +
                             " is not a positive multiple of r=" + std::to_string(r));
        for (int y = 0; y + tile <= pair.pan.height; y += tile)
            for (int x = 0; x + tile <= pair.pan.width; x += tile)
                tiles.push_back({crop_image(pair.pan, x, y, tile, tile),
                                 crop_image(pair.ms, x / r, y / r, tile / r, tile / r),
                                 crop_image(pair.gt, x, y, tile, tile)});
    }
    return tiles;
}

TrainResult train(const std::vector<TrainPair>& pairs, const TrainConfig& cfg) {
    if (pairs.empty()) throw ShapeError("train: need at least one training pair");
    TrainResult result{make_identity_model(cfg.points, cfg.sd_mode), {}};
    OptimState state;
    result.log.reserve(cfg.epochs);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = scheduled_lr(cfg.base_lr, epoch, cfg.decay_every);
        EpochLog entry;
        entry.epoch = epoch;
        entry.lr = lr;
        for (const TrainPair& pair : pairs) {
            auto fb = forward_backward(result.model, pair.pan, pair.ms, pair.gt, cfg.loss);
            adam_step(model_params(result.model, fb.grads), state, lr);
            entry.loss += fb.loss.total;
            entry.fidelity += fb.loss.fidelity;
            entry.smooth += fb.loss.smooth;
            entry.mono += fb.loss.mono;
            entry.psnr += fb.loss.fidelity > 0.0
                              ? std::min(100.0, 10.0 * std::log10(1.0 / fb.loss.fidelity))
                              : 100.0;
        }
        const double inv = 1.0 / static_cast<double>(pairs.size());
        entry.loss *= inv;
        entry.fidelity *= inv;
        entry.smooth *= inv;
        entry.mono *= inv;
        entry.psnr *= inv;
        if (cfg.on_epoch) cfg.on_epoch(entry);
        result.log.push_back(entry);
    }
    return result;
}

} // namespace panlut
