#include "nipen/objective.hpp"

#include <algorithm>
#include <cmath>

#include "nipen/error.hpp"

namespace nipen {

void Hyperparams::validate() const {
    const auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(name) + " must be a nonnegative finite real");
    };
    nonneg(lambda_f, "lambda_f");
    nonneg(lambda_y, "lambda_y");
    nonneg(lambda_u, "lambda_u");
    nonneg(lambda_tau, "lambda_tau");
    nonneg(lambda_alpha, "lambda_alpha");
    nonneg(lambda_n, "lambda_n");
    if (num_topics < 1) throw ConfigError("num_topics must be at least 1");
    if (trust_rank < 1) throw ConfigError("trust_rank must be at least 1");
    if (num_samples < 1) throw ConfigError("num_samples must be at least 1");
    if (corruption_ratio < 0.0 || corruption_ratio >= 1.0)
        throw ConfigError("corruption_ratio must lie in [0, 1)");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (epochs < 0) throw ConfigError("epochs must be nonnegative");
    if (inner_steps < 1) throw ConfigError("inner_steps must be at least 1");
    if (tensor_layers < 1 || tensor_layers > 2)
        throw ConfigError("tensor_layers must be 1 or 2");
    if (warmup_epochs < 0) throw ConfigError("warmup_epochs must be nonnegative");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must lie in [0, 1)");
    for (int h : hidden)
        if (h < 1) throw ConfigError("hidden widths must be positive");
    if (min_unique_words < 0) throw ConfigError("min_unique_words must be nonnegative");
}

JointData JointData::build(const VoteMatrix& votes, const DocTermMatrix& docs,
                           const NeighborSets& neighbors) {
    if (docs.num_docs != votes.num_bills)
        throw DataError("JointData: document count differs from bill count");
    if (neighbors.num_legislators != votes.num_legislators)
        throw DataError("JointData: neighbor sets cover a different legislator count");
    JointData data;
    data.votes = &votes;
    data.docs = &docs;
    data.neighbors = &neighbors;
    data.docs_norm = docs.normalized();
    data.votes_by_bill = votes.by_bill();
    return data;
}

Matrix deterministic_codes(const Model& model, const JointData& data) {
    Matrix z = encode(model.ae, data.docs_norm).mu;
    for (int d = 0; d < z.rows(); ++d)
        if (data.docs->flagged[d]) z.row(d).setZero();
    return z;
}

// ---------------------------------------------------------------------------
// Objective pieces.
// ---------------------------------------------------------------------------

namespace {

constexpr double kProbClamp = 1e-12;

double clamp_prob(double p) {
    return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

} // namespace

double vote_log_likelihood(const std::vector<double>& probs,
                           const std::vector<double>& votes, double lambda_f) {
    if (probs.size() != votes.size())
        throw Error("vote_log_likelihood: probability/vote length mismatch");
    double sum = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= 0.0 && probs[i] <= 1.0))
            throw NumericError("vote_log_likelihood: probability outside [0, 1]");
        const double t = (1.0 + votes[i]) / 2.0;
        const double p = clamp_prob(probs[i]);
        sum += t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    return 0.5 * lambda_f * sum;
}

double coupling_penalty(const Matrix& y, const Matrix& z, double lambda_y) {
    if (y.rows() != z.rows() || y.cols() != z.cols())
        throw Error("coupling_penalty: shape mismatch");
    return 0.5 * lambda_y * (y - z).squaredNorm();
}

RegTriple regularizers(const Model& model, const Hyperparams& hp) {
    const PgmParams& p = model.pgm;
    RegTriple reg;
    reg.ideal_reg = 0.5 * hp.lambda_u *
                    (p.legislator_ideal.squaredNorm() + p.bill_ideal.squaredNorm());
    if (model.variant == ModelVariant::Tensor) {
        double tw = model.tensor.out_weight.squaredNorm();
        for (const TensorLayerParams& layer : model.tensor.layers)
            tw += layer.weight.squaredNorm() + layer.bias.squaredNorm();
        reg.ideal_reg += 0.5 * hp.lambda_u * tw;
    }
    if (model.network_enabled) {
        reg.tau_reg = 0.5 * hp.lambda_tau * p.trust_left.squaredNorm();
        if (!p.trust_full_rank)
            reg.tau_reg += 0.5 * hp.lambda_tau * p.trust_right.squaredNorm();
        reg.scale_reg = 0.5 * hp.lambda_alpha *
                        (p.content_scale.squaredNorm() + p.network_scale.squaredNorm());
    }
    return reg;
}

// ---------------------------------------------------------------------------
// Total loss.
// ---------------------------------------------------------------------------

LossBreakdown total_loss(const Model& model, const JointData& data, const Hyperparams& hp,
                         const AeNoise& noise) {
    const PgmParams& P = model.pgm;
    LossBreakdown out;

    // Autoencoder terms over unflagged documents.
    const EncodeResult enc = encode(model.ae, data.docs_norm);
    Matrix z = enc.mu;
    for (int d = 0; d < z.rows(); ++d)
        if (data.docs->flagged[d]) z.row(d).setZero();

    double sse = 0.0;
    if (model.ae.kind == AeKind::Vae) {
        if (noise.eps.empty()) throw ConfigError("total_loss: missing eps draws");
        for (int d = 0; d < enc.mu.rows(); ++d) {
            if (data.docs->flagged[d]) continue;
            out.kl += 0.5 * (enc.mu.row(d).array().square() +
                             enc.logvar.row(d).array().exp() - enc.logvar.row(d).array() - 1.0)
                                .sum();
        }
        for (const Matrix& eps : noise.eps) {
            const Matrix sample = reparameterize(enc.mu, enc.logvar, eps);
            const Matrix recon = decode(model.ae, sample);
            for (int d = 0; d < recon.rows(); ++d) {
                if (data.docs->flagged[d]) continue;
                sse += (recon.row(d) - data.docs_norm.row(d)).squaredNorm();
            }
        }
        sse /= static_cast<double>(noise.eps.size());
    } else {
        if (noise.keep_mask.size() == 0) throw ConfigError("total_loss: missing corruption mask");
        const Matrix corrupted = data.docs_norm.cwiseProduct(noise.keep_mask);
        const Matrix recon = decode(model.ae, encode(model.ae, corrupted).mu);
        for (int d = 0; d < recon.rows(); ++d) {
            if (data.docs->flagged[d]) continue;
            sse += (recon.row(d) - data.docs_norm.row(d)).squaredNorm();
        }
    }
    out.reconstruction = -hp.lambda_n * sse;

    // Vote log-likelihood on the logit scale.
    const Matrix tau = effective_tau(P);
    const double lf2 = 0.5 * hp.lambda_f;
    for (const VoteEntry& e : data.votes->entries) {
        const int u = e.legislator;
        const int d = e.bill;
        const double net = network_sum(tau, *data.neighbors, data.votes_by_bill[d], u);
        double content = 0.0;
        if (model.variant == ModelVariant::Tensor) {
            content = tensor_forward(P, model.tensor, z, model.composition, u, d).content;
        } else {
            content = (P.bill_offset.row(d) + z.row(d))
                          .cwiseProduct(P.bill_ideal.row(d))
                          .dot(P.legislator_ideal.row(u)) +
                      P.bill_bias[d];
        }
        const double s = P.content_scale[u] * content + P.network_scale[u] * net;
        const double t = (1.0 + e.vote) / 2.0;
        out.vote_loglik += lf2 * (t * log_sigmoid(s) + (1.0 - t) * log_sigmoid(-s));
    }

    // y - z is the stored offset by construction.
    out.y_coupling = 0.5 * hp.lambda_y * P.bill_offset.squaredNorm();

    const RegTriple reg = regularizers(model, hp);
    out.ideal_reg = reg.ideal_reg;
    out.tau_reg = reg.tau_reg;
    out.scale_reg = reg.scale_reg;

    out.total = -out.kl + out.reconstruction + out.vote_loglik - out.y_coupling -
                out.ideal_reg - out.tau_reg - out.scale_reg;
    if (!std::isfinite(out.total)) throw NumericError("total_loss: objective is not finite");
    return out;
}

// ---------------------------------------------------------------------------
// Phase gradients.
// ---------------------------------------------------------------------------

namespace {

PgmParams zero_pgm_like(const PgmParams& p) {
    PgmParams g;
    g.legislator_ideal = Matrix::Zero(p.legislator_ideal.rows(), p.legislator_ideal.cols());
    g.bill_ideal = Matrix::Zero(p.bill_ideal.rows(), p.bill_ideal.cols());
    g.bill_offset = Matrix::Zero(p.bill_offset.rows(), p.bill_offset.cols());
    g.bill_bias = Vector::Zero(p.bill_bias.size());
    g.content_scale = Vector::Zero(p.content_scale.size());
    g.network_scale = Vector::Zero(p.network_scale.size());
    g.trust_left = Matrix::Zero(p.trust_left.rows(), p.trust_left.cols());
    g.trust_right = Matrix::Zero(p.trust_right.rows(), p.trust_right.cols());
    g.trust_full_rank = p.trust_full_rank;
    return g;
}

TensorParams zero_tensor_like(const TensorParams& t) {
    TensorParams g;
    for (const TensorLayerParams& layer : t.layers) {
        TensorLayerParams zl;
        zl.weight = Matrix::Zero(layer.weight.rows(), layer.weight.cols());
        zl.bias = Vector::Zero(layer.bias.size());
        g.layers.push_back(std::move(zl));
    }
    g.out_weight = Vector::Zero(t.out_weight.size());
    return g;
}

// Backpropagates d(content)/d(interaction vector) through the tanh layers,
// accumulating tensor weight gradients scaled by `coeff`.
Vector tensor_backward(const TensorParams& tensor, const TensorForward& fwd, double coeff,
                       TensorParams* grads) {
    Vector dtop = coeff * tensor.out_weight;
    if (grads != nullptr) grads->out_weight += coeff * fwd.acts.back();
    for (int i = static_cast<int>(tensor.layers.size()) - 1; i >= 0; --i) {
        const Vector dpre =
            dtop.cwiseProduct((1.0 - fwd.acts[i + 1].array().square()).matrix());
        if (grads != nullptr) {
            grads->layers[i].weight += fwd.acts[i] * dpre.transpose();
            grads->layers[i].bias += dpre;
        }
        dtop = tensor.layers[i].weight * dpre;
    }
    return dtop; // d(content)/d(e)
}

} // namespace

Psi2Grads grad_psi2(const Model& model, const JointData& data, const Hyperparams& hp,
                    const Matrix& z) {
    const PgmParams& P = model.pgm;
    const bool tensorv = model.variant == ModelVariant::Tensor;
    const int K = P.num_topics();

    Psi2Grads G;
    G.pgm = zero_pgm_like(P);
    if (tensorv) G.tensor = zero_tensor_like(model.tensor);

    const Matrix tau = effective_tau(P);
    const double lf2 = 0.5 * hp.lambda_f;

    for (const VoteEntry& e : data.votes->entries) {
        const int u = e.legislator;
        const int d = e.bill;
        const double net = network_sum(tau, *data.neighbors, data.votes_by_bill[d], u);

        double content = 0.0;
        TensorForward fwd;
        if (tensorv) {
            fwd = tensor_forward(P, model.tensor, z, model.composition, u, d);
            content = fwd.content;
        } else {
            content = (P.bill_offset.row(d) + z.row(d))
                          .cwiseProduct(P.bill_ideal.row(d))
                          .dot(P.legislator_ideal.row(u)) +
                      P.bill_bias[d];
        }

        const double s = P.content_scale[u] * content + P.network_scale[u] * net;
        const double g = lf2 * ((1.0 + e.vote) / 2.0 - sigmoid(s));
        const double gc = g * P.content_scale[u]; // flow into the content logit

        G.pgm.content_scale[u] += g * content;
        G.pgm.network_scale[u] += g * net;
        G.pgm.bill_bias[d] += gc;

        if (!tensorv) {
            for (int k = 0; k < K; ++k) {
                const double y = P.bill_offset(d, k) + z(d, k);
                const double a = P.bill_ideal(d, k);
                const double x = P.legislator_ideal(u, k);
                G.pgm.legislator_ideal(u, k) += gc * y * a;
                G.pgm.bill_ideal(d, k) += gc * y * x;
                G.pgm.bill_offset(d, k) += gc * a * x;
            }
        } else {
            const Vector de = tensor_backward(model.tensor, fwd, gc, &G.tensor);
            for (int k = 0; k < K; ++k) {
                const double y = P.bill_offset(d, k) + z(d, k);
                const double x = P.legislator_ideal(u, k);
                if (model.composition == TensorComposition::Printed) {
                    G.pgm.legislator_ideal(u, k) += de[k] * y * z(d, k);
                    G.pgm.bill_offset(d, k) += de[k] * x * z(d, k);
                } else {
                    const double a = P.bill_ideal(d, k);
                    G.pgm.legislator_ideal(u, k) += de[k] * y * a;
                    G.pgm.bill_ideal(d, k) += de[k] * x * y;
                    G.pgm.bill_offset(d, k) += de[k] * x * a;
                }
            }
        }

        // Trust factors through the network term.
        const double gb = g * P.network_scale[u];
        if (gb != 0.0) {
            for (const auto& [v, r] : data.votes_by_bill[d]) {
                if (!data.neighbors->is_neighbor(u, v)) continue;
                const double c = gb * r;
                if (P.trust_full_rank) {
                    G.pgm.trust_left(u, v) += c;
                } else {
                    G.pgm.trust_left.row(u) += c * P.trust_right.col(v).transpose();
                    G.pgm.trust_right.col(v) += c * P.trust_left.row(u).transpose();
                }
            }
        }
    }

    // Gaussian priors enter the ascent direction as shrinkage.
    G.pgm.legislator_ideal -= hp.lambda_u * P.legislator_ideal;
    G.pgm.bill_ideal -= hp.lambda_u * P.bill_ideal;
    G.pgm.bill_offset -= hp.lambda_y * P.bill_offset;
    if (model.network_enabled) {
        G.pgm.content_scale -= hp.lambda_alpha * P.content_scale;
        G.pgm.network_scale -= hp.lambda_alpha * P.network_scale;
        G.pgm.trust_left -= hp.lambda_tau * P.trust_left;
        if (!P.trust_full_rank) G.pgm.trust_right -= hp.lambda_tau * P.trust_right;
    }
    if (tensorv) {
        for (size_t i = 0; i < model.tensor.layers.size(); ++i) {
            G.tensor.layers[i].weight -= hp.lambda_u * model.tensor.layers[i].weight;
            G.tensor.layers[i].bias -= hp.lambda_u * model.tensor.layers[i].bias;
        }
        G.tensor.out_weight -= hp.lambda_u * model.tensor.out_weight;
    }
    return G;
}

AeGrads grad_psi1(const Model& model, const JointData& data, const Hyperparams& hp,
                  const AeNoise& noise, const Matrix& y_frozen) {
    const PgmParams& P = model.pgm;
    const Matrix z = deterministic_codes(model, data);
    if (y_frozen.rows() != z.rows() || y_frozen.cols() != z.cols())
        throw Error("grad_psi1: y_frozen shape mismatch");

    // Coupling pulls codes toward the frozen positions.
    Matrix code_grad = hp.lambda_y * (y_frozen - z);

    // With the Printed composition the raw code is a factor of the
    // interaction vector, so vote terms reach the encoder directly.
    if (model.variant == ModelVariant::Tensor &&
        model.composition == TensorComposition::Printed) {
        const Matrix tau = effective_tau(P);
        const double lf2 = 0.5 * hp.lambda_f;
        const int K = P.num_topics();
        for (const VoteEntry& e : data.votes->entries) {
            const int u = e.legislator;
            const int d = e.bill;
            if (data.docs->flagged[d]) continue; // code pinned at zero
            const TensorForward fwd =
                tensor_forward(P, model.tensor, z, model.composition, u, d);
            const double net = network_sum(tau, *data.neighbors, data.votes_by_bill[d], u);
            const double s =
                P.content_scale[u] * fwd.content + P.network_scale[u] * net;
            const double g = lf2 * ((1.0 + e.vote) / 2.0 - sigmoid(s));
            const Vector de =
                tensor_backward(model.tensor, fwd, g * P.content_scale[u], nullptr);
            for (int k = 0; k < K; ++k)
                code_grad(d, k) += de[k] * P.legislator_ideal(u, k) * y_frozen(d, k);
        }
    }

    return ae_objective_grads(model.ae, *data.docs, noise, hp.lambda_n, &code_grad);
}

// ---------------------------------------------------------------------------
// Flat views.
// ---------------------------------------------------------------------------

namespace {

struct Psi2Layout {
    bool tensor = false;
    bool full_rank = false;
    bool network = true;
};

Psi2Layout psi2_layout(const Model& m) {
    return {m.variant == ModelVariant::Tensor, m.pgm.trust_full_rank, m.network_enabled};
}

template <class Pgm, class Ten, class F>
void visit_psi2(Pgm& pgm, Ten& tensor, const Psi2Layout& lay, F&& f) {
    f(pgm.legislator_ideal);
    f(pgm.bill_ideal);
    f(pgm.bill_offset);
    f(pgm.bill_bias);
    if (lay.network) {
        f(pgm.content_scale);
        f(pgm.network_scale);
        f(pgm.trust_left);
        if (!lay.full_rank) f(pgm.trust_right);
    }
    if (lay.tensor) {
        for (auto& layer : tensor.layers) {
            f(layer.weight);
            f(layer.bias);
        }
        f(tensor.out_weight);
    }
}

template <class Block>
void copy_out(const Block& block, Vector& flat, int& cursor) {
    for (int i = 0; i < block.size(); ++i) flat[cursor++] = block.data()[i];
}

template <class Block>
void copy_in(Block& block, const Vector& flat, int& cursor) {
    for (int i = 0; i < block.size(); ++i) block.data()[i] = flat[cursor++];
}

} // namespace

int psi2_size(const Model& model) {
    int n = 0;
    visit_psi2(model.pgm, model.tensor, psi2_layout(model),
               [&n](const auto& block) { n += static_cast<int>(block.size()); });
    return n;
}

Vector pack_psi2(const Model& model) {
    Vector flat(psi2_size(model));
    int cursor = 0;
    visit_psi2(model.pgm, model.tensor, psi2_layout(model),
               [&](const auto& block) { copy_out(block, flat, cursor); });
    return flat;
}

void unpack_psi2(Model& model, const Vector& flat) {
    if (flat.size() != psi2_size(model)) throw Error("unpack_psi2: size mismatch");
    int cursor = 0;
    visit_psi2(model.pgm, model.tensor, psi2_layout(model),
               [&](auto& block) { copy_in(block, flat, cursor); });
}

Vector pack_psi2_grads(const Model& model, const Psi2Grads& grads) {
    Vector flat(psi2_size(model));
    int cursor = 0;
    visit_psi2(grads.pgm, grads.tensor, psi2_layout(model),
               [&](const auto& block) { copy_out(block, flat, cursor); });
    return flat;
}

namespace {

int ae_layer_size(const AffineLayer& layer) {
    return static_cast<int>(layer.weight.size() + layer.bias.size());
}

} // namespace

int psi1_size(const Model& model) {
    int n = 0;
    for (const auto& layer : model.ae.encoder) n += ae_layer_size(layer);
    n += ae_layer_size(model.ae.code_head);
    if (model.ae.kind == AeKind::Vae) n += ae_layer_size(model.ae.logvar_head);
    for (const auto& layer : model.ae.decoder) n += ae_layer_size(layer);
    return n;
}

Vector pack_psi1(const Model& model) {
    Vector flat(psi1_size(model));
    int cursor = 0;
    const auto emit = [&](const AffineLayer& layer) {
        copy_out(layer.weight, flat, cursor);
        copy_out(layer.bias, flat, cursor);
    };
    for (const auto& layer : model.ae.encoder) emit(layer);
    emit(model.ae.code_head);
    if (model.ae.kind == AeKind::Vae) emit(model.ae.logvar_head);
    for (const auto& layer : model.ae.decoder) emit(layer);
    return flat;
}

void unpack_psi1(Model& model, const Vector& flat) {
    if (flat.size() != psi1_size(model)) throw Error("unpack_psi1: size mismatch");
    int cursor = 0;
    const auto take = [&](AffineLayer& layer) {
        copy_in(layer.weight, flat, cursor);
        copy_in(layer.bias, flat, cursor);
    };
    for (auto& layer : model.ae.encoder) take(layer);
    take(model.ae.code_head);
    if (model.ae.kind == AeKind::Vae) take(model.ae.logvar_head);
    for (auto& layer : model.ae.decoder) take(layer);
}

Vector pack_psi1_grads(const Model& model, const AeGrads& grads) {
    Vector flat(psi1_size(model));
    int cursor = 0;
    const auto emit = [&](const LayerGrads& g) {
        copy_out(g.dweight, flat, cursor);
        copy_out(g.dbias, flat, cursor);
    };
    for (const auto& g : grads.encoder) emit(g);
    emit(grads.code_head);
    if (model.ae.kind == AeKind::Vae) emit(grads.logvar_head);
    for (const auto& g : grads.decoder) emit(g);
    return flat;
}

} // namespace nipen
