#pragma once

#include <string>
#include <vector>

#include "nipen/evaluate.hpp"
#include "nipen/objective.hpp"

namespace nipen {

// ---------------------------------------------------------------------------
// Coordinate ascent on the joint objective.
//
// Each joint epoch runs the collaborative-filtering phase (codes held
// fixed) and then the autoencoder phase (bill positions y held fixed;
// after the step the stored offset is refit to y - z so positions are
// unchanged by the encoder update). Warmup epochs update the autoencoder
// alone. Noise (reparametrization draws, corruption masks) is drawn from
// the state's own stream once per epoch, so checkpoint resume replays the
// identical sequence.
// ---------------------------------------------------------------------------

struct EpochRecord {
    int epoch = 0;
    std::string phase; // "warmup", "cf" or "ae"
    LossBreakdown loss;
};

struct TrainState {
    Model model;
    Hyperparams hp;
    int epoch = 0; // completed epochs, warmup included
    std::vector<EpochRecord> history;
    std::mt19937_64 noise_rng;
    bool has_pinned_noise = false;
    AeNoise pinned_noise;
    Vector psi1_velocity;
    Vector psi2_velocity;
};

// Fresh model: network weights uniform in +-1/sqrt(fan_in) with zero
// biases, latent factors from N(0, 0.01), bill and popularity biases zero.
// The full-rank variant pins trust_right to the identity; with the network
// ablation alpha is 1, beta and trust are 0.
Model init_model(int num_legislators, int num_bills, int vocab, const Hyperparams& hp,
                 ModelVariant variant, TensorComposition comp, uint64_t seed);

TrainState init_state(const JointData& data, const Hyperparams& hp, ModelVariant variant,
                      TensorComposition comp, uint64_t seed);

// Runs `num_epochs` further epochs (warmup first while state.epoch is below
// hp.warmup_epochs). On divergence the parameters are restored to the last
// finite state and a NumericError is thrown.
void train_epochs(TrainState& state, const JointData& data, int num_epochs);

// init_state + hp.warmup_epochs + hp.epochs.
TrainState train(const JointData& data, const Hyperparams& hp, ModelVariant variant,
                 TensorComposition comp, uint64_t seed);

// ---------------------------------------------------------------------------
// Versioned binary checkpoints; save/load round-trips bit-exactly and a
// loaded state continues training exactly as the uninterrupted run would.
// ---------------------------------------------------------------------------

void save_checkpoint(const TrainState& state, const std::string& path);
TrainState load_checkpoint(const std::string& path);

// CSV with columns epoch, phase, kl, reconstruction, vote_loglik,
// y_coupling, ideal_reg, tau_reg, scale_reg, total.
void write_training_log(const std::string& path, const std::vector<EpochRecord>& history);

// ---------------------------------------------------------------------------
// Hyperparameter sweep: full cross-validated train/evaluate per grid point.
// A failing point is recorded with its error and the sweep continues.
// ---------------------------------------------------------------------------

struct SweepPoint {
    double lambda_y = 0.0;
    double lambda_tau = 0.0;
    int trust_rank = 0;
};

struct SweepRow {
    SweepPoint point;
    bool ok = false;
    std::string error;
    CvReport report;
};

std::vector<SweepRow> sweep(const Corpus& corpus, const Hyperparams& base,
                            ModelVariant variant, TensorComposition comp,
                            const std::vector<double>& lambda_y_grid,
                            const std::vector<double>& lambda_tau_grid,
                            const std::vector<int>& trust_rank_grid, int folds,
                            uint64_t seed);

std::string sweep_csv(const std::vector<SweepRow>& rows);

} // namespace nipen
