// Loss terms (MSE fidelity + smoothness and monotonicity regularizers over
// the table lattices), the Adam optimizer with step-decay schedule, the
// full forward/backward pass and the epoch loop.

#ifndef PANLUT_TRAINING_HPP
#define PANLUT_TRAINING_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "panlut/pipeline.hpp"

namespace panlut {

struct LossConfig {
    double lambda_s = 1e-4; // smoothness weight
    double lambda_m = 10.0; // monotonicity weight
};

// Mean squared error over all samples.
double loss_fidelity(const MultiBandImage& pred, const MultiBandImage& gt);

// Sum of squared forward differences along every axis (channels included);
// terms whose +1 neighbor falls off the lattice are omitted.
double loss_smooth(const LutTable& table);

// Sum of relu(entry(p) - entry(p + axis step)): penalizes decreases.
double loss_mono(const LutTable& table);

// fidelity + lambda_s * (smooth over all tables) + lambda_m * (mono over all).
double loss_total(const MultiBandImage& pred, const MultiBandImage& gt,
                  const PanLutModel& model, const LossConfig& cfg);

// Gradient accumulation for the regularizers, scaled by `scale`.
void loss_smooth_grad(const LutTable& table, double scale, std::vector<double>& grad);
void loss_mono_grad(const LutTable& table, double scale, std::vector<double>& grad);

struct LossBreakdown {
    double total = 0.0;    // optimization objective: squared-error sum + weighted regs
    double fidelity = 0.0; // per-sample mean squared error
    double smooth = 0.0;
    double mono = 0.0;
};

struct ModelGrads {
    std::vector<double> pg, sd, ao;
};

struct ForwardBackwardResult {
    LossBreakdown loss;
    ModelGrads grads;
    MultiBandImage pred;    // forward output (after final clamp)
    MultiBandImage pm_grad; // dL/dPM: gradient w.r.t. the assembled 5-band input
};

// Forward with tape, then backward chaining AOLUT -> SDLUT -> PGLUT over
// the training objective (squared-error sum + weighted regularizers).
// Clamped samples propagate zero gradient.
ForwardBackwardResult forward_backward(const PanLutModel& model,
                                       const MultiBandImage& pan,
                                       const MultiBandImage& ms,
                                       const MultiBandImage& gt,
                                       const LossConfig& cfg);

struct OptimState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<double> m, v; // first/second moments over the flat parameters
    long long step = 0;
};

// base_lr halved once per `every` epochs (exact powers of two).
double scheduled_lr(double base_lr, long long epoch, int every = 200);

// Non-owning view of the concatenated parameter vector of the three tables.
struct ParamVector {
    std::array<double*, 3> parts{};
    std::array<const double*, 3> grads{};
    std::array<std::size_t, 3> sizes{};
};

ParamVector model_params(PanLutModel& model, const ModelGrads& grads);

// One bias-corrected Adam update over the view. Throws NumericError on a
// non-finite gradient.
void adam_step(const ParamVector& pv, OptimState& state, double lr);
void adam_step(double* params, const double* grads, std::size_t n,
               OptimState& state, double lr);

struct TrainPair {
    MultiBandImage pan;
    MultiBandImage ms;
    MultiBandImage gt;
};

// Dices a pair into aligned square tiles (PAN-scale edge lengths, multiples
// of the resolution ratio), row-major order. Partial edge tiles are skipped.
// Patch-level training pairs drive one optimizer step each.
std::vector<TrainPair> make_training_tiles(const TrainPair& pair,
                                           const std::vector<int>& tile_sizes);

struct EpochLog {
    int epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
    double fidelity = 0.0;
    double smooth = 0.0;
    double mono = 0.0;
    double psnr = 0.0;
};

struct TrainConfig {
    int points = 9;
    int epochs = 1000;
    double base_lr = 5e-4;
    int decay_every = 200;
    LossConfig loss;
    SdMode sd_mode = SdMode::Chained;
    std::function<void(const EpochLog&)> on_epoch; // optional progress sink
};

struct TrainResult {
    PanLutModel model;
    std::vector<EpochLog> log;
};

// Identity-initialized model; per epoch, pairs in fixed order, one Adam step
// per pair (batch size 1). Deterministic and bitwise reproducible.
TrainResult train(const std::vector<TrainPair>& pairs, const TrainConfig& cfg);

} // namespace panlut

#endif
