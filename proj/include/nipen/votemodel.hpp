#pragma once

#include <utility>
#include <vector>

#include "nipen/autoencoder.hpp"
#include "nipen/corpus.hpp"
#include "nipen/nn.hpp"

namespace nipen {

// ---------------------------------------------------------------------------
// Topic-factorized vote model parameters.
//
// Bill topic positions decompose as y_d = bill_offset_d + z_d, where z_d is
// the document code from the autoencoder; y is always derived, never stored.
// Trust is a low-rank product: tau = trust_left * trust_right, so the
// parameter count is 2*U*G rather than U^2. With trust_full_rank set,
// trust_right is pinned to the identity (G == U) and tau is trust_left.
// ---------------------------------------------------------------------------

struct PgmParams {
    Matrix legislator_ideal; // U x K, per-topic ideal points
    Matrix bill_ideal;       // D x K, per-topic bill positions
    Matrix bill_offset;      // D x K, corrective offset on document codes
    Vector bill_bias;        // D, per-bill popularity
    Vector content_scale;    // U, weight on the content logit (alpha)
    Vector network_scale;    // U, weight on the trust-network term (beta)
    Matrix trust_left;       // U x G
    Matrix trust_right;      // G x U
    bool trust_full_rank = false;

    int num_legislators() const { return static_cast<int>(legislator_ideal.rows()); }
    int num_bills() const { return static_cast<int>(bill_ideal.rows()); }
    int num_topics() const { return static_cast<int>(legislator_ideal.cols()); }
    int trust_rank() const { return static_cast<int>(trust_left.cols()); }

    void check_shapes() const;
};

// Dense U x U trust matrix; the diagonal is never consulted because
// neighbor sets exclude self-loops.
Matrix effective_tau(const PgmParams& params);

// Bill topic positions y = bill_offset + z.
Matrix bill_positions(const PgmParams& params, const Matrix& z);

// ---------------------------------------------------------------------------
// Cross-topic neural combination (tensor variant).
//
// Per cell, the per-topic interaction vector e is squashed through tanh
// layer(s) whose square weight matrices mix topics, then projected to a
// scalar content logit. tanh keeps the sign of the interactions, which a
// one-sided rectifier would destroy.
// ---------------------------------------------------------------------------

struct TensorLayerParams {
    Matrix weight; // K x K
    Vector bias;   // K
};

struct TensorParams {
    std::vector<TensorLayerParams> layers; // default depth 1, config allows 2
    Vector out_weight;                     // K

    bool empty() const { return layers.empty() && out_weight.size() == 0; }
    void check_shapes(int num_topics) const;
};

// How the per-topic interaction is composed:
//   Printed: e_k = x_uk * y_dk * z_dk (offset-plus-code position times raw code)
//   Prose:   e_k = x_uk * y_dk * a_dk (position times per-topic bill ideal)
enum class TensorComposition { Printed, Prose };

// ---------------------------------------------------------------------------
// Vote probabilities.
// ---------------------------------------------------------------------------

// Content-only model: sigma(sum_k y_dk * a_dk * x_uk + eta_d).
double pgm_vote_prob_basic(const PgmParams& params, const Matrix& z, int u, int d);

// Trust-network sum for legislator u on one bill: sum over observed neighbor
// votes of tau_uu' * r_u'd. Unobserved neighbors contribute zero.
double network_sum(const Matrix& tau, const NeighborSets& neighbors,
                   const std::vector<std::pair<int, double>>& bill_votes, int u);

// Full model: sigma(alpha_u * (content + eta_d) + beta_u * network).
// Neighbor votes are read from `context` (training-set observations).
double pgm_vote_prob(const PgmParams& params, const Matrix& z, const VoteMatrix& context,
                     const NeighborSets& neighbors, int u, int d);

// Tensor-variant forward pass for one cell, keeping layer activations for
// backpropagation. acts[0] is the interaction vector e.
struct TensorForward {
    std::vector<Vector> acts;
    double content = 0.0; // includes bill_bias
};

TensorForward tensor_forward(const PgmParams& params, const TensorParams& tensor,
                             const Matrix& z, TensorComposition comp, int u, int d);

double tensor_vote_prob(const PgmParams& params, const TensorParams& tensor, const Matrix& z,
                        const VoteMatrix& context, const NeighborSets& neighbors,
                        int u, int d, TensorComposition comp);

// ---------------------------------------------------------------------------
// Model bundle.
// ---------------------------------------------------------------------------

enum class ModelVariant { PgmVae, PgmSdae, PgmVaeFullRank, Tensor };

const char* variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string& name);
AeKind ae_kind_for(ModelVariant v);

struct Model {
    ModelVariant variant = ModelVariant::PgmVae;
    TensorComposition composition = TensorComposition::Printed;
    PgmParams pgm;
    TensorParams tensor; // populated only for the Tensor variant
    AutoencoderParams ae;
    // Ablation switch: when false, alpha is pinned at 1, beta at 0 and trust
    // at 0, so probabilities reduce to the content-only model.
    bool network_enabled = true;
};

// Probabilities for the requested (legislator, bill) cells. Codes come from
// the documents; neighbor votes come from `context` only, so held-out cells
// never leak into their own predictions.
std::vector<double> predict_matrix(const Model& model, const DocTermMatrix& docs,
                                   const VoteMatrix& context, const NeighborSets& neighbors,
                                   const std::vector<std::pair<int, int>>& cells);

} // namespace nipen
