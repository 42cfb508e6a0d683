#include "nipen/autoencoder.hpp"

#include <cmath>

#include "nipen/error.hpp"

namespace nipen {

AutoencoderParams make_autoencoder(AeKind kind, int vocab, int latent,
                                   const std::vector<int>& hidden, std::mt19937_64& rng) {
    if (vocab <= 0 || latent <= 0)
        throw ConfigError("autoencoder needs positive vocab and latent sizes");
    for (int h : hidden)
        if (h <= 0) throw ConfigError("autoencoder hidden widths must be positive");

    AutoencoderParams p;
    p.kind = kind;

    const auto make_layer = [&](int in, int out, Activation act) {
        AffineLayer layer;
        layer.weight = Matrix::Zero(in, out);
        layer.bias = Vector::Zero(out);
        layer.act = act;
        init_affine(layer, rng);
        return layer;
    };

    int prev = vocab;
    for (int h : hidden) {
        p.encoder.push_back(make_layer(prev, h, Activation::Sigmoid));
        prev = h;
    }
    p.code_head = make_layer(prev, latent,
                             kind == AeKind::Vae ? Activation::Identity : Activation::Sigmoid);
    if (kind == AeKind::Vae)
        p.logvar_head = make_layer(prev, latent, Activation::Identity);

    prev = latent;
    for (auto it = hidden.rbegin(); it != hidden.rend(); ++it) {
        p.decoder.push_back(make_layer(prev, *it, Activation::Sigmoid));
        prev = *it;
    }
    p.decoder.push_back(make_layer(prev, vocab, Activation::Sigmoid));
    return p;
}

namespace {

void check_finite(const Matrix& m, const char* stage, size_t layer_index) {
    if (!m.allFinite())
        throw NumericError(std::string(stage) + " layer " + std::to_string(layer_index) +
                           " produced non-finite activations");
}

// Forward through the encoder trunk, keeping every activation
// (activations[0] is the input itself).
std::vector<Matrix> trunk_forward(const AutoencoderParams& params, const Matrix& input) {
    std::vector<Matrix> acts;
    acts.reserve(params.encoder.size() + 1);
    acts.push_back(input);
    for (size_t i = 0; i < params.encoder.size(); ++i) {
        acts.push_back(affine_forward(params.encoder[i], acts.back()));
        check_finite(acts.back(), "encoder", i);
    }
    return acts;
}

std::vector<Matrix> decoder_forward(const AutoencoderParams& params, const Matrix& codes) {
    std::vector<Matrix> acts;
    acts.reserve(params.decoder.size() + 1);
    acts.push_back(codes);
    for (size_t i = 0; i < params.decoder.size(); ++i) {
        acts.push_back(affine_forward(params.decoder[i], acts.back()));
        check_finite(acts.back(), "decoder", i);
    }
    return acts;
}

void zero_flagged_rows(Matrix& m, const std::vector<uint8_t>& flagged) {
    for (int d = 0; d < m.rows(); ++d)
        if (d < static_cast<int>(flagged.size()) && flagged[d]) m.row(d).setZero();
}

void accumulate(LayerGrads& acc, const AffineGrads& g) {
    if (acc.dweight.size() == 0) {
        acc.dweight = g.dweight;
        acc.dbias = g.dbias;
    } else {
        acc.dweight += g.dweight;
        acc.dbias += g.dbias;
    }
}

} // namespace

EncodeResult encode(const AutoencoderParams& params, const Matrix& input) {
    const std::vector<Matrix> acts = trunk_forward(params, input);
    EncodeResult r;
    r.mu = affine_forward(params.code_head, acts.back());
    check_finite(r.mu, "encoder code head", params.encoder.size());
    if (params.kind == AeKind::Vae) {
        r.logvar = affine_forward(params.logvar_head, acts.back());
        check_finite(r.logvar, "encoder logvar head", params.encoder.size());
    } else {
        r.logvar = Matrix::Zero(r.mu.rows(), r.mu.cols());
    }
    return r;
}

EncodeResult encode(const AutoencoderParams& params, const DocTermMatrix& docs) {
    return encode(params, docs.normalized());
}

Matrix decode(const AutoencoderParams& params, const Matrix& codes) {
    return decoder_forward(params, codes).back();
}

Matrix reparameterize(const Matrix& mu, const Matrix& logvar, const Matrix& eps) {
    if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols() ||
        mu.rows() != eps.rows() || mu.cols() != eps.cols())
        throw Error("reparameterize: shape mismatch");
    return mu + (logvar.array() / 2.0).exp().matrix().cwiseProduct(eps);
}

double gaussian_kl(const Matrix& mu, const Matrix& logvar) {
    if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols())
        throw Error("gaussian_kl: shape mismatch");
    return 0.5 * (mu.array().square() + logvar.array().exp() - logvar.array() - 1.0).sum();
}

Matrix extract_topics(const AutoencoderParams& params, const DocTermMatrix& docs) {
    Matrix z = encode(params, docs).mu;
    zero_flagged_rows(z, docs.flagged);
    return z;
}

AeNoise draw_noise(AeKind kind, int num_docs, int latent, int vocab, int num_samples,
                   double corruption_ratio, std::mt19937_64& rng) {
    AeNoise noise;
    if (kind == AeKind::Vae) {
        for (int l = 0; l < num_samples; ++l)
            noise.eps.push_back(draw_normal_matrix(num_docs, latent, rng));
    } else {
        noise.keep_mask = Matrix(num_docs, vocab);
        for (int d = 0; d < num_docs; ++d)
            for (int v = 0; v < vocab; ++v)
                noise.keep_mask(d, v) = uniform01(rng) < corruption_ratio ? 0.0 : 1.0;
    }
    return noise;
}

AeLoss vae_loss(const AutoencoderParams& params, const DocTermMatrix& docs,
                int num_samples, std::mt19937_64& rng) {
    const AeNoise noise = draw_noise(AeKind::Vae, docs.num_docs, params.latent_dim(),
                                     docs.vocab_size, num_samples, 0.0, rng);
    return vae_loss_pinned(params, docs, noise);
}

AeLoss vae_loss_pinned(const AutoencoderParams& params, const DocTermMatrix& docs,
                       const AeNoise& noise) {
    if (params.kind != AeKind::Vae) throw ConfigError("vae_loss called on a non-Vae model");
    if (noise.eps.empty()) throw ConfigError("vae_loss needs at least one noise sample");

    const Matrix input = docs.normalized();
    const EncodeResult enc = encode(params, input);

    AeLoss loss;
    loss.noise = noise;
    for (int d = 0; d < docs.num_docs; ++d) {
        if (docs.flagged[d]) continue;
        loss.kl += 0.5 * (enc.mu.row(d).array().square() + enc.logvar.row(d).array().exp() -
                          enc.logvar.row(d).array() - 1.0)
                             .sum();
    }

    double sse = 0.0;
    for (const Matrix& eps : noise.eps) {
        const Matrix z = reparameterize(enc.mu, enc.logvar, eps);
        const Matrix recon = decode(params, z);
        for (int d = 0; d < docs.num_docs; ++d) {
            if (docs.flagged[d]) continue;
            sse += (recon.row(d) - input.row(d)).squaredNorm();
        }
    }
    loss.recon_loglik = -sse / static_cast<double>(noise.eps.size());
    loss.total = loss.kl - loss.recon_loglik;
    return loss;
}

DocTermMatrix sdae_corrupt(const DocTermMatrix& docs, double corruption_ratio,
                           std::mt19937_64& rng) {
    if (corruption_ratio < 0.0 || corruption_ratio >= 1.0)
        throw ConfigError("corruption ratio must lie in [0, 1)");
    DocTermMatrix out = docs;
    for (auto& row : out.rows)
        for (auto& [term, count] : row)
            if (count > 0.0 && uniform01(rng) < corruption_ratio) count = 0.0;
    return out;
}

namespace {

// Corrupted rows scaled by the clean row max, so inputs and targets share
// one scale per document.
Matrix normalized_against(const DocTermMatrix& corrupted, const DocTermMatrix& clean) {
    Matrix out = Matrix::Zero(clean.num_docs, clean.vocab_size);
    for (int d = 0; d < clean.num_docs; ++d) {
        double maxc = 0.0;
        for (const auto& [term, count] : clean.rows[d]) maxc = std::max(maxc, count);
        if (maxc <= 0.0) continue;
        for (const auto& [term, count] : corrupted.rows[d]) out(d, term) = count / maxc;
    }
    return out;
}

} // namespace

double sdae_loss(const AutoencoderParams& params, const DocTermMatrix& docs,
                 const DocTermMatrix& corrupted) {
    if (params.kind != AeKind::Sdae) throw ConfigError("sdae_loss called on a non-Sdae model");
    if (corrupted.num_docs != docs.num_docs || corrupted.vocab_size != docs.vocab_size)
        throw DataError("sdae_loss: corrupted matrix shape mismatch");

    const Matrix target = docs.normalized();
    const Matrix input = normalized_against(corrupted, docs);
    const Matrix codes = encode(params, input).mu;
    const Matrix recon = decode(params, codes);

    double sse = 0.0;
    for (int d = 0; d < docs.num_docs; ++d) {
        if (docs.flagged[d]) continue;
        sse += (recon.row(d) - target.row(d)).squaredNorm();
    }
    return sse;
}

AeGrads zero_like(const AutoencoderParams& params) {
    AeGrads g;
    const auto zero_layer = [](const AffineLayer& layer) {
        LayerGrads lg;
        lg.dweight = Matrix::Zero(layer.weight.rows(), layer.weight.cols());
        lg.dbias = Vector::Zero(layer.bias.size());
        return lg;
    };
    for (const auto& layer : params.encoder) g.encoder.push_back(zero_layer(layer));
    g.code_head = zero_layer(params.code_head);
    if (params.kind == AeKind::Vae) g.logvar_head = zero_layer(params.logvar_head);
    for (const auto& layer : params.decoder) g.decoder.push_back(zero_layer(layer));
    return g;
}

AeGrads ae_objective_grads(const AutoencoderParams& params, const DocTermMatrix& docs,
                           const AeNoise& noise, double recon_weight,
                           const Matrix* code_grad) {
    AeGrads grads = zero_like(params);
    const Matrix clean = docs.normalized();

    const auto mask_rows = [&docs](Matrix m) {
        zero_flagged_rows(m, docs.flagged);
        return m;
    };

    // Backpropagates dL/d(trunk output) through the encoder trunk given the
    // cached activations of that pass.
    const auto trunk_backward = [&](const std::vector<Matrix>& acts, Matrix dtop) {
        for (int i = static_cast<int>(params.encoder.size()) - 1; i >= 0; --i) {
            const AffineGrads g = affine_backward(params.encoder[i], acts[i], dtop);
            accumulate(grads.encoder[i], g);
            dtop = g.dinput;
        }
    };

    const auto decoder_backward = [&](const std::vector<Matrix>& acts, Matrix dtop) {
        for (int i = static_cast<int>(params.decoder.size()) - 1; i >= 0; --i) {
            const AffineGrads g = affine_backward(params.decoder[i], acts[i], dtop);
            accumulate(grads.decoder[i], g);
            dtop = g.dinput;
        }
        return dtop; // dL/d(codes)
    };

    if (params.kind == AeKind::Vae) {
        if (noise.eps.empty()) throw ConfigError("ae_objective_grads: missing eps draws");
        const std::vector<Matrix> acts = trunk_forward(params, clean);
        const Matrix& top = acts.back();
        const Matrix mu = affine_forward(params.code_head, top);
        const Matrix logvar = affine_forward(params.logvar_head, top);

        // KL enters the maximized objective with a minus sign.
        Matrix dmu = mask_rows(-mu);
        Matrix dlogvar = mask_rows((-0.5 * (logvar.array().exp() - 1.0)).matrix());
        if (code_grad != nullptr) dmu += mask_rows(*code_grad);

        const double sample_w = recon_weight / static_cast<double>(noise.eps.size());
        const Matrix sigma = (logvar.array() / 2.0).exp().matrix();
        for (const Matrix& eps : noise.eps) {
            const Matrix z = mu + sigma.cwiseProduct(eps);
            const std::vector<Matrix> dacts = decoder_forward(params, z);
            const Matrix dout = mask_rows((-2.0 * sample_w) * (dacts.back() - clean));
            const Matrix dz = decoder_backward(dacts, dout);
            dmu += dz;
            dlogvar += (0.5 * dz.array() * sigma.array() * eps.array()).matrix();
        }

        const AffineGrads gmu = affine_backward(params.code_head, top, dmu);
        const AffineGrads glv = affine_backward(params.logvar_head, top, dlogvar);
        accumulate(grads.code_head, gmu);
        accumulate(grads.logvar_head, glv);
        trunk_backward(acts, gmu.dinput + glv.dinput);
    } else {
        if (noise.keep_mask.size() == 0)
            throw ConfigError("ae_objective_grads: missing corruption mask");
        // Reconstruction path: corrupted input, clean target.
        const Matrix corrupted_input = clean.cwiseProduct(noise.keep_mask);
        const std::vector<Matrix> cacts = trunk_forward(params, corrupted_input);
        const Matrix code_c = affine_forward(params.code_head, cacts.back());
        const std::vector<Matrix> dacts = decoder_forward(params, code_c);
        const Matrix dout = mask_rows((-2.0 * recon_weight) * (dacts.back() - clean));
        const Matrix dcode_c = decoder_backward(dacts, dout);
        const AffineGrads gc = affine_backward(params.code_head, cacts.back(), dcode_c);
        accumulate(grads.code_head, gc);
        trunk_backward(cacts, gc.dinput);

        // External flows reach the deterministic clean-input bottleneck.
        if (code_grad != nullptr) {
            const std::vector<Matrix> acts = trunk_forward(params, clean);
            const AffineGrads gh =
                affine_backward(params.code_head, acts.back(), mask_rows(*code_grad));
            accumulate(grads.code_head, gh);
            trunk_backward(acts, gh.dinput);
        }
    }
    return grads;
}

} // namespace nipen
