#pragma once

#include <vector>

#include "nipen/corpus.hpp"
#include "nipen/nn.hpp"

namespace nipen {

// Two document models share one parameter layout:
//   Vae  - variational autoencoder; code_head emits the Gaussian mean,
//          logvar_head the log variance, and codes are sampled by
//          reparametrization during training.
//   Sdae - denoising autoencoder; code_head is a sigmoid bottleneck and
//          logvar_head is unused. Inputs are corrupted, targets are clean.
enum class AeKind { Vae, Sdae };

struct AutoencoderParams {
    AeKind kind = AeKind::Vae;
    std::vector<AffineLayer> encoder; // sigmoid trunk, vocab -> last hidden
    AffineLayer code_head;            // hidden -> K; identity (Vae) or sigmoid (Sdae)
    AffineLayer logvar_head;          // hidden -> K identity; Vae only
    std::vector<AffineLayer> decoder; // K -> ... -> vocab, final layer sigmoid

    int latent_dim() const { return code_head.out_dim(); }
    int vocab_size() const { return encoder.empty() ? code_head.in_dim() : encoder.front().in_dim(); }
};

// Symmetric net: encoder trunk `hidden` = {512, 128} gives the shape
// vocab -> 512 -> 128 -> K -> 128 -> 512 -> vocab.
AutoencoderParams make_autoencoder(AeKind kind, int vocab, int latent,
                                   const std::vector<int>& hidden, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Forward passes.
// ---------------------------------------------------------------------------

struct EncodeResult {
    Matrix mu;     // D x K
    Matrix logvar; // D x K, zeros for Sdae
};

// Rows of `input` are max-normalized documents. Throws NumericError naming
// the first layer that produces a non-finite activation.
EncodeResult encode(const AutoencoderParams& params, const Matrix& input);
EncodeResult encode(const AutoencoderParams& params, const DocTermMatrix& docs);

Matrix decode(const AutoencoderParams& params, const Matrix& codes);

// z = mu + exp(logvar / 2) * eps, elementwise; affine in eps.
Matrix reparameterize(const Matrix& mu, const Matrix& logvar, const Matrix& eps);

// KL(N(mu, diag(exp(logvar))) || N(0, I)) summed over all entries:
// 0.5 * sum(mu^2 + exp(logvar) - logvar - 1). Zero iff mu = logvar = 0.
double gaussian_kl(const Matrix& mu, const Matrix& logvar);

// Deterministic per-document codes for the vote model: the Gaussian mean
// (Vae) or the clean-input bottleneck (Sdae). Rows of short-text flagged
// documents are zero.
Matrix extract_topics(const AutoencoderParams& params, const DocTermMatrix& docs);

// ---------------------------------------------------------------------------
// Noise draws (reparametrization samples and corruption masks).
// ---------------------------------------------------------------------------

struct AeNoise {
    std::vector<Matrix> eps; // Vae: one D x K draw per Monte Carlo sample
    Matrix keep_mask;        // Sdae: D x V in {0,1}; 1 keeps the entry
};

AeNoise draw_noise(AeKind kind, int num_docs, int latent, int vocab, int num_samples,
                   double corruption_ratio, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Losses. Reconstruction log-likelihood of one document is the negative
// squared error between the decoded row and the clean normalized row.
// ---------------------------------------------------------------------------

struct AeLoss {
    double kl = 0.0;           // >= 0; zero for Sdae
    double recon_loglik = 0.0; // <= 0
    double total = 0.0;        // kl - recon_loglik, minimized
    AeNoise noise;             // draws actually used, for pinning
};

// Negative ELBO averaged over `num_samples` reparametrization draws, summed
// over unflagged documents.
AeLoss vae_loss(const AutoencoderParams& params, const DocTermMatrix& docs,
                int num_samples, std::mt19937_64& rng);
AeLoss vae_loss_pinned(const AutoencoderParams& params, const DocTermMatrix& docs,
                       const AeNoise& noise);

// Masking corruption: every stored entry is independently zeroed with the
// given probability; counts are otherwise preserved.
DocTermMatrix sdae_corrupt(const DocTermMatrix& docs, double corruption_ratio,
                           std::mt19937_64& rng);

// Squared reconstruction error of the clean rows from corrupted inputs, both
// scaled by the clean row max, summed over unflagged documents.
double sdae_loss(const AutoencoderParams& params, const DocTermMatrix& docs,
                 const DocTermMatrix& corrupted);

// ---------------------------------------------------------------------------
// Joint-objective gradient entry point.
//
// Returns the ascent gradient of
//     -kl_scale * KL + recon_weight * recon_loglik + sum_d <code_grad_d, code_d>
// where code_d is the deterministic document code. code_grad (D x K, may be
// null) carries flows from outside the autoencoder (vote terms, coupling);
// rows of flagged documents are ignored. kl_scale is 1 for Vae, 0 for Sdae.
// ---------------------------------------------------------------------------

struct LayerGrads {
    Matrix dweight;
    Vector dbias;
};

struct AeGrads {
    std::vector<LayerGrads> encoder;
    LayerGrads code_head;
    LayerGrads logvar_head;
    std::vector<LayerGrads> decoder;
};

AeGrads ae_objective_grads(const AutoencoderParams& params, const DocTermMatrix& docs,
                           const AeNoise& noise, double recon_weight,
                           const Matrix* code_grad);

AeGrads zero_like(const AutoencoderParams& params);

} // namespace nipen
