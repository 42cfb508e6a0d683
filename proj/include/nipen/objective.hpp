#pragma once

#include <vector>

#include "nipen/corpus.hpp"
#include "nipen/votemodel.hpp"

namespace nipen {

// ---------------------------------------------------------------------------
// Hyperparameters. Defaults follow the reference configuration; every field
// can be overridden from the run config.
// ---------------------------------------------------------------------------

struct Hyperparams {
    double lambda_f = 10.0;     // vote log-likelihood weight
    double lambda_y = 10.0;     // offset (code-coupling) precision
    double lambda_u = 0.1;      // ideal-point precision (and tensor weight decay)
    double lambda_tau = 1.0;    // trust factor precision
    double lambda_alpha = 1.0;  // alpha/beta precision
    double lambda_n = 1000.0;   // reconstruction weight
    int num_topics = 10;        // K
    int trust_rank = 3;         // G
    int num_samples = 1;        // reparametrization draws per evaluation
    double corruption_ratio = 0.4;
    double learning_rate = 0.05;
    int epochs = 30;
    int inner_steps = 1;        // ascent steps per phase per epoch
    uint64_t seed = 0;

    std::vector<int> hidden = {512, 128}; // encoder trunk widths
    int tensor_layers = 1;                // 1 or 2
    int warmup_epochs = 10;               // autoencoder-only epochs before joint ones
    double momentum = 0.0;                // classical momentum, 0 disables
    bool line_search = true;              // halve the step until non-decreasing
    bool pin_noise_once = false;          // freeze noise at epoch 0 (diagnostics)
    int min_unique_words = 10;
    bool network_enabled = true;          // false = content-only ablation

    void validate() const; // throws ConfigError
};

// ---------------------------------------------------------------------------
// Loss decomposition. Signs are stored so that
//   total = -kl + reconstruction + vote_loglik
//           - y_coupling - ideal_reg - tau_reg - scale_reg
// holds exactly; `total` is the quantity coordinate ascent maximizes.
// `reconstruction` is already weighted by lambda_n, the vote term by
// lambda_f/2 and every penalty by its lambda/2.
// ---------------------------------------------------------------------------

struct LossBreakdown {
    double kl = 0.0;             // >= 0
    double reconstruction = 0.0; // <= 0
    double vote_loglik = 0.0;    // <= 0
    double y_coupling = 0.0;     // >= 0
    double ideal_reg = 0.0;      // >= 0
    double tau_reg = 0.0;        // >= 0
    double scale_reg = 0.0;      // >= 0
    double total = 0.0;
};

// ---------------------------------------------------------------------------
// Immutable per-problem view: one vote matrix (training cells only), the
// document matrix and neighbor sets, plus cached derived structures.
// ---------------------------------------------------------------------------

struct JointData {
    const VoteMatrix* votes = nullptr;
    const DocTermMatrix* docs = nullptr;
    const NeighborSets* neighbors = nullptr;
    Matrix docs_norm; // rows scaled by per-document max
    std::vector<std::vector<std::pair<int, double>>> votes_by_bill;

    static JointData build(const VoteMatrix& votes, const DocTermMatrix& docs,
                           const NeighborSets& neighbors);
};

// Deterministic document codes with flagged rows zeroed.
Matrix deterministic_codes(const Model& model, const JointData& data);

// ---------------------------------------------------------------------------
// Objective pieces.
// ---------------------------------------------------------------------------

// (lambda_f / 2) * sum over cells of t*log(p) + (1-t)*log(1-p), t = (1+r)/2.
// Probabilities are clamped to [1e-12, 1 - 1e-12] before the logs.
double vote_log_likelihood(const std::vector<double>& probs,
                           const std::vector<double>& votes, double lambda_f);

// (lambda_y / 2) * ||y - z||_F^2.
double coupling_penalty(const Matrix& y, const Matrix& z, double lambda_y);

struct RegTriple {
    double ideal_reg = 0.0; // lambda_u/2 * (||x||^2 + ||a||^2 [+ tensor weights])
    double tau_reg = 0.0;   // lambda_tau/2 * (||trust_left||^2 + ||trust_right||^2)
    double scale_reg = 0.0; // lambda_alpha/2 * (||alpha||^2 + ||beta||^2)
};

// With the network ablation active the pinned alpha/beta/trust blocks are
// not free parameters and contribute nothing.
RegTriple regularizers(const Model& model, const Hyperparams& hp);

// Full objective at the current parameters under the given pinned noise.
LossBreakdown total_loss(const Model& model, const JointData& data, const Hyperparams& hp,
                         const AeNoise& noise);

// ---------------------------------------------------------------------------
// Phase gradients (ascent direction).
//
// The collaborative-filtering phase treats the document codes z as
// constants; its bill-offset block is then also the gradient with respect
// to the composite position y. The autoencoder phase holds y fixed at
// `y_frozen`, so the coupling pulls z toward y and, for the tensor variant
// with the Printed composition, vote terms flow into z directly.
// ---------------------------------------------------------------------------

struct Psi2Grads {
    PgmParams pgm;       // same shapes as the parameters, gradient values
    TensorParams tensor; // empty unless the tensor variant is active
};

Psi2Grads grad_psi2(const Model& model, const JointData& data, const Hyperparams& hp,
                    const Matrix& z);

AeGrads grad_psi1(const Model& model, const JointData& data, const Hyperparams& hp,
                  const AeNoise& noise, const Matrix& y_frozen);

// ---------------------------------------------------------------------------
// Flat parameter views. Pack/unpack share one block order, so ascent steps,
// momentum and finite-difference checks all agree on the layout. Blocks
// pinned by the network ablation (and the identity trust_right factor of the
// full-rank variant) are excluded.
// ---------------------------------------------------------------------------

int psi2_size(const Model& model);
Vector pack_psi2(const Model& model);
void unpack_psi2(Model& model, const Vector& flat);
Vector pack_psi2_grads(const Model& model, const Psi2Grads& grads);

int psi1_size(const Model& model);
Vector pack_psi1(const Model& model);
void unpack_psi1(Model& model, const Vector& flat);
Vector pack_psi1_grads(const Model& model, const AeGrads& grads);

} // namespace nipen
