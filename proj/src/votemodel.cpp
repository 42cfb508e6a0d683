#include "nipen/votemodel.hpp"

#include <cmath>

#include "nipen/error.hpp"

namespace nipen {

void PgmParams::check_shapes() const {
    const int U = num_legislators();
    const int D = num_bills();
    const int K = num_topics();
    const int G = trust_rank();
    if (bill_ideal.cols() != K || bill_offset.rows() != D || bill_offset.cols() != K)
        throw Error("PgmParams: bill block shape mismatch");
    if (bill_bias.size() != D || content_scale.size() != U || network_scale.size() != U)
        throw Error("PgmParams: vector block shape mismatch");
    if (trust_left.rows() != U || trust_right.cols() != U || trust_right.rows() != G)
        throw Error("PgmParams: trust factor shape mismatch");
    if (trust_full_rank && G != U)
        throw Error("PgmParams: full-rank trust requires G == U");
}

Matrix effective_tau(const PgmParams& params) {
    if (params.trust_full_rank) return params.trust_left;
    return params.trust_left * params.trust_right;
}

Matrix bill_positions(const PgmParams& params, const Matrix& z) {
    if (z.rows() != params.bill_offset.rows() || z.cols() != params.bill_offset.cols())
        throw Error("bill_positions: code matrix shape mismatch");
    return params.bill_offset + z;
}

void TensorParams::check_shapes(int num_topics) const {
    for (const TensorLayerParams& layer : layers)
        if (layer.weight.rows() != num_topics || layer.weight.cols() != num_topics ||
            layer.bias.size() != num_topics)
            throw Error("TensorParams: layer must be K x K with a K bias");
    if (out_weight.size() != num_topics)
        throw Error("TensorParams: output weights must have length K");
}

namespace {

void check_cell(const PgmParams& params, int u, int d) {
    if (u < 0 || u >= params.num_legislators())
        throw DataError("legislator index " + std::to_string(u) + " out of range");
    if (d < 0 || d >= params.num_bills())
        throw DataError("bill index " + std::to_string(d) + " out of range");
}

double content_dot(const PgmParams& params, const Matrix& z, int u, int d) {
    double dot = 0.0;
    for (int k = 0; k < params.num_topics(); ++k)
        dot += (params.bill_offset(d, k) + z(d, k)) * params.bill_ideal(d, k) *
               params.legislator_ideal(u, k);
    return dot;
}

} // namespace

double pgm_vote_prob_basic(const PgmParams& params, const Matrix& z, int u, int d) {
    check_cell(params, u, d);
    return sigmoid(content_dot(params, z, u, d) + params.bill_bias[d]);
}

double network_sum(const Matrix& tau, const NeighborSets& neighbors,
                   const std::vector<std::pair<int, double>>& bill_votes, int u) {
    double sum = 0.0;
    for (const auto& [v, r] : bill_votes)
        if (neighbors.is_neighbor(u, v)) sum += tau(u, v) * r;
    return sum;
}

double pgm_vote_prob(const PgmParams& params, const Matrix& z, const VoteMatrix& context,
                     const NeighborSets& neighbors, int u, int d) {
    check_cell(params, u, d);
    const Matrix tau = effective_tau(params);
    std::vector<std::pair<int, double>> bill_votes;
    for (const VoteEntry& e : context.entries)
        if (e.bill == d) bill_votes.emplace_back(e.legislator, static_cast<double>(e.vote));
    const double content = content_dot(params, z, u, d) + params.bill_bias[d];
    const double network = network_sum(tau, neighbors, bill_votes, u);
    return sigmoid(params.content_scale[u] * content + params.network_scale[u] * network);
}

TensorForward tensor_forward(const PgmParams& params, const TensorParams& tensor,
                             const Matrix& z, TensorComposition comp, int u, int d) {
    check_cell(params, u, d);
    const int K = params.num_topics();
    tensor.check_shapes(K);

    Vector e(K);
    for (int k = 0; k < K; ++k) {
        const double y = params.bill_offset(d, k) + z(d, k);
        const double third =
            comp == TensorComposition::Printed ? z(d, k) : params.bill_ideal(d, k);
        e[k] = params.legislator_ideal(u, k) * y * third;
    }

    TensorForward fwd;
    fwd.acts.push_back(e);
    for (const TensorLayerParams& layer : tensor.layers) {
        const Vector pre = layer.weight.transpose() * fwd.acts.back() + layer.bias;
        fwd.acts.push_back(pre.array().tanh().matrix());
    }
    fwd.content = fwd.acts.back().dot(tensor.out_weight) + params.bill_bias[d];
    return fwd;
}

double tensor_vote_prob(const PgmParams& params, const TensorParams& tensor, const Matrix& z,
                        const VoteMatrix& context, const NeighborSets& neighbors,
                        int u, int d, TensorComposition comp) {
    const TensorForward fwd = tensor_forward(params, tensor, z, comp, u, d);
    const Matrix tau = effective_tau(params);
    std::vector<std::pair<int, double>> bill_votes;
    for (const VoteEntry& e : context.entries)
        if (e.bill == d) bill_votes.emplace_back(e.legislator, static_cast<double>(e.vote));
    const double network = network_sum(tau, neighbors, bill_votes, u);
    return sigmoid(params.content_scale[u] * fwd.content +
                   params.network_scale[u] * network);
}

const char* variant_name(ModelVariant v) {
    switch (v) {
        case ModelVariant::PgmVae: return "pgm-vae";
        case ModelVariant::PgmSdae: return "pgm-sdae";
        case ModelVariant::PgmVaeFullRank: return "pgm-vae-fullrank";
        case ModelVariant::Tensor: return "tensor";
    }
    return "?";
}

ModelVariant variant_from_name(const std::string& name) {
    if (name == "pgm-vae") return ModelVariant::PgmVae;
    if (name == "pgm-sdae") return ModelVariant::PgmSdae;
    if (name == "pgm-vae-fullrank") return ModelVariant::PgmVaeFullRank;
    if (name == "tensor") return ModelVariant::Tensor;
    throw ConfigError("unknown model variant '" + name +
                      "'; expected pgm-vae, pgm-sdae, pgm-vae-fullrank or tensor");
}

AeKind ae_kind_for(ModelVariant v) {
    return v == ModelVariant::PgmSdae ? AeKind::Sdae : AeKind::Vae;
}

std::vector<double> predict_matrix(const Model& model, const DocTermMatrix& docs,
                                   const VoteMatrix& context, const NeighborSets& neighbors,
                                   const std::vector<std::pair<int, int>>& cells) {
    const Matrix z = extract_topics(model.ae, docs);
    const Matrix tau = effective_tau(model.pgm);
    const auto by_bill = context.by_bill();

    std::vector<double> probs;
    probs.reserve(cells.size());
    for (const auto& [u, d] : cells) {
        check_cell(model.pgm, u, d);
        const double network = network_sum(tau, neighbors, by_bill[d], u);
        double content = 0.0;
        if (model.variant == ModelVariant::Tensor) {
            content = tensor_forward(model.pgm, model.tensor, z, model.composition, u, d).content;
        } else {
            content = content_dot(model.pgm, z, u, d) + model.pgm.bill_bias[d];
        }
        probs.push_back(sigmoid(model.pgm.content_scale[u] * content +
                                model.pgm.network_scale[u] * network));
    }
    return probs;
}

} // namespace nipen
