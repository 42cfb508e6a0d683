#include "nipen/trainer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "nipen/error.hpp"
#include "nipen/text.hpp"

namespace nipen {

// ---------------------------------------------------------------------------
// Initialization.
// ---------------------------------------------------------------------------

Model init_model(int num_legislators, int num_bills, int vocab, const Hyperparams& hp,
                 ModelVariant variant, TensorComposition comp, uint64_t seed) {
    hp.validate();
    if (num_legislators < 1 || num_bills < 1 || vocab < 1)
        throw ConfigError("init_model: dimensions must be positive");

    std::mt19937_64 rng = substream(seed, "init");
    Model m;
    m.variant = variant;
    m.composition = comp;
    m.network_enabled = hp.network_enabled;
    m.ae = make_autoencoder(ae_kind_for(variant), vocab, hp.num_topics, hp.hidden, rng);

    const int U = num_legislators;
    const int D = num_bills;
    const int K = hp.num_topics;
    const bool full_rank = variant == ModelVariant::PgmVaeFullRank;
    const int G = full_rank ? U : hp.trust_rank;

    PgmParams& p = m.pgm;
    p.legislator_ideal = 0.1 * draw_normal_matrix(U, K, rng);
    p.bill_ideal = 0.1 * draw_normal_matrix(D, K, rng);
    p.bill_offset = 0.1 * draw_normal_matrix(D, K, rng);
    p.bill_bias = Vector::Zero(D);
    p.content_scale = 0.1 * draw_normal_vector(U, rng);
    p.network_scale = 0.1 * draw_normal_vector(U, rng);
    p.trust_full_rank = full_rank;
    p.trust_left = 0.1 * draw_normal_matrix(U, G, rng);
    p.trust_right = full_rank ? Matrix::Identity(U, U)
                              : Matrix(0.1 * draw_normal_matrix(G, U, rng));

    if (!hp.network_enabled) {
        p.content_scale = Vector::Ones(U);
        p.network_scale = Vector::Zero(U);
        p.trust_left.setZero();
        if (!full_rank) p.trust_right.setZero();
    }

    if (variant == ModelVariant::Tensor) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(K));
        for (int i = 0; i < hp.tensor_layers; ++i) {
            TensorLayerParams layer;
            layer.weight = Matrix(K, K);
            for (int r = 0; r < K; ++r)
                for (int c = 0; c < K; ++c)
                    layer.weight(r, c) = (2.0 * uniform01(rng) - 1.0) * scale;
            layer.bias = Vector::Zero(K);
            m.tensor.layers.push_back(std::move(layer));
        }
        m.tensor.out_weight = Vector(K);
        for (int k = 0; k < K; ++k)
            m.tensor.out_weight[k] = (2.0 * uniform01(rng) - 1.0) * scale;
    }

    p.check_shapes();
    return m;
}

TrainState init_state(const JointData& data, const Hyperparams& hp, ModelVariant variant,
                      TensorComposition comp, uint64_t seed) {
    TrainState st;
    st.hp = hp;
    st.model = init_model(data.votes->num_legislators, data.votes->num_bills,
                          data.docs->vocab_size, hp, variant, comp, seed);
    st.noise_rng = substream(seed, st.model.ae.kind == AeKind::Vae ? "vae-noise" : "sdae-mask");
    st.psi1_velocity = Vector::Zero(psi1_size(st.model));
    st.psi2_velocity = Vector::Zero(psi2_size(st.model));
    if (hp.pin_noise_once) {
        st.pinned_noise =
            draw_noise(st.model.ae.kind, data.docs->num_docs, hp.num_topics,
                       data.docs->vocab_size, hp.num_samples, hp.corruption_ratio, st.noise_rng);
        st.has_pinned_noise = true;
    }
    return st;
}

// ---------------------------------------------------------------------------
// Ascent steps.
// ---------------------------------------------------------------------------

namespace {

AeNoise epoch_noise(TrainState& st, const JointData& data) {
    if (st.has_pinned_noise) return st.pinned_noise;
    return draw_noise(st.model.ae.kind, data.docs->num_docs, st.hp.num_topics,
                      data.docs->vocab_size, st.hp.num_samples, st.hp.corruption_ratio,
                      st.noise_rng);
}

// One gradient step with optional backtracking. apply_delta installs
// base + delta; restore reinstates the exact starting point. Returns the
// objective after the accepted step (f0 when every backtrack failed).
double ascent_step(const Hyperparams& hp, const Vector& grad, Vector& velocity, double f0,
                   const std::function<void(const Vector&)>& apply_delta,
                   const std::function<void()>& restore,
                   const std::function<double()>& eval) {
    if (!grad.allFinite()) throw NumericError("gradient is not finite");
    double lr = hp.learning_rate;
    for (int attempt = 0; attempt < 41; ++attempt) {
        const Vector v = hp.momentum * velocity + lr * grad;
        apply_delta(v);
        double f1;
        try {
            f1 = eval();
        } catch (const NumericError&) {
            if (!hp.line_search) throw;
            f1 = -std::numeric_limits<double>::infinity();
        }
        if (!hp.line_search || f1 >= f0 - 1e-12) {
            velocity = v;
            return f1;
        }
        lr *= 0.5;
    }
    restore();
    velocity.setZero();
    return f0;
}

void run_warmup_phase(TrainState& st, const JointData& data, const AeNoise& noise) {
    // Reconstruction and KL only; the rest of the objective is untouched.
    const auto eval = [&]() {
        const LossBreakdown b = total_loss(st.model, data, st.hp, noise);
        return -b.kl + b.reconstruction;
    };
    for (int s = 0; s < st.hp.inner_steps; ++s) {
        const AeGrads g =
            ae_objective_grads(st.model.ae, *data.docs, noise, st.hp.lambda_n, nullptr);
        const Vector grad = pack_psi1_grads(st.model, g);
        const Vector base = pack_psi1(st.model);
        const double f0 = eval();
        ascent_step(
            st.hp, grad, st.psi1_velocity, f0,
            [&](const Vector& v) { unpack_psi1(st.model, base + v); },
            [&]() { unpack_psi1(st.model, base); }, eval);
    }
}

void run_cf_phase(TrainState& st, const JointData& data, const AeNoise& noise) {
    // Document codes are constants throughout the phase.
    const Matrix z = deterministic_codes(st.model, data);
    const auto eval = [&]() { return total_loss(st.model, data, st.hp, noise).total; };
    for (int s = 0; s < st.hp.inner_steps; ++s) {
        const Psi2Grads g = grad_psi2(st.model, data, st.hp, z);
        const Vector grad = pack_psi2_grads(st.model, g);
        const Vector base = pack_psi2(st.model);
        const double f0 = eval();
        ascent_step(
            st.hp, grad, st.psi2_velocity, f0,
            [&](const Vector& v) { unpack_psi2(st.model, base + v); },
            [&]() { unpack_psi2(st.model, base); }, eval);
    }
}

void run_ae_phase(TrainState& st, const JointData& data, const AeNoise& noise) {
    const auto eval = [&]() { return total_loss(st.model, data, st.hp, noise).total; };
    for (int s = 0; s < st.hp.inner_steps; ++s) {
        const Matrix z0 = deterministic_codes(st.model, data);
        const Matrix y_frozen = st.model.pgm.bill_offset + z0;
        const Matrix offset0 = st.model.pgm.bill_offset;
        const AeGrads g = grad_psi1(st.model, data, st.hp, noise, y_frozen);
        const Vector grad = pack_psi1_grads(st.model, g);
        const Vector base = pack_psi1(st.model);
        const double f0 = eval();
        ascent_step(
            st.hp, grad, st.psi1_velocity, f0,
            [&](const Vector& v) {
                unpack_psi1(st.model, base + v);
                // Refit the offset so bill positions survive the encoder move.
                st.model.pgm.bill_offset = y_frozen - deterministic_codes(st.model, data);
            },
            [&]() {
                unpack_psi1(st.model, base);
                st.model.pgm.bill_offset = offset0;
            },
            eval);
    }
}

} // namespace

void train_epochs(TrainState& state, const JointData& data, int num_epochs) {
    for (int i = 0; i < num_epochs; ++i) {
        const Model snapshot = state.model;
        const Vector v1 = state.psi1_velocity;
        const Vector v2 = state.psi2_velocity;
        try {
            const AeNoise noise = epoch_noise(state, data);
            if (state.epoch < state.hp.warmup_epochs) {
                run_warmup_phase(state, data, noise);
                state.history.push_back(
                    {state.epoch, "warmup", total_loss(state.model, data, state.hp, noise)});
            } else {
                run_cf_phase(state, data, noise);
                state.history.push_back(
                    {state.epoch, "cf", total_loss(state.model, data, state.hp, noise)});
                run_ae_phase(state, data, noise);
                state.history.push_back(
                    {state.epoch, "ae", total_loss(state.model, data, state.hp, noise)});
            }
            state.epoch += 1;
        } catch (const NumericError& err) {
            state.model = snapshot;
            state.psi1_velocity = v1;
            state.psi2_velocity = v2;
            throw NumericError("training diverged at epoch " + std::to_string(state.epoch) +
                               " (" + err.what() + "); parameters restored to the last finite state");
        }
    }
}

TrainState train(const JointData& data, const Hyperparams& hp, ModelVariant variant,
                 TensorComposition comp, uint64_t seed) {
    TrainState state = init_state(data, hp, variant, comp, seed);
    train_epochs(state, data, hp.warmup_epochs + hp.epochs);
    return state;
}

// ---------------------------------------------------------------------------
// Checkpoints.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'N', 'I', 'P', 'E', 'N', 'C', 'K', 'P'};
constexpr uint32_t kVersion = 1;

void put_bytes(std::ostream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u64(std::ostream& os, uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    put_bytes(os, buf, 8);
}

void put_u32(std::ostream& os, uint32_t v) { put_u64(os, v); }
void put_i32(std::ostream& os, int v) { put_u64(os, static_cast<uint64_t>(static_cast<int64_t>(v))); }
void put_u8(std::ostream& os, uint8_t v) { put_bytes(os, &v, 1); }

void put_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
}

void put_string(std::ostream& os, const std::string& s) {
    put_u64(os, s.size());
    put_bytes(os, s.data(), s.size());
}

void put_matrix(std::ostream& os, const Matrix& m) {
    put_u64(os, static_cast<uint64_t>(m.rows()));
    put_u64(os, static_cast<uint64_t>(m.cols()));
    for (int i = 0; i < m.size(); ++i) put_f64(os, m.data()[i]);
}

void put_vector(std::ostream& os, const Vector& v) {
    put_u64(os, static_cast<uint64_t>(v.size()));
    for (int i = 0; i < v.size(); ++i) put_f64(os, v[i]);
}

void put_affine(std::ostream& os, const AffineLayer& layer) {
    put_u8(os, static_cast<uint8_t>(layer.act));
    put_matrix(os, layer.weight);
    put_vector(os, layer.bias);
}

void get_bytes(std::istream& is, void* p, size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (is.gcount() != static_cast<std::streamsize>(n))
        throw DataError("checkpoint truncated");
}

uint64_t get_u64(std::istream& is) {
    unsigned char buf[8];
    get_bytes(is, buf, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
    return v;
}

uint32_t get_u32(std::istream& is) { return static_cast<uint32_t>(get_u64(is)); }
int get_i32(std::istream& is) { return static_cast<int>(static_cast<int64_t>(get_u64(is))); }

uint8_t get_u8(std::istream& is) {
    uint8_t v;
    get_bytes(is, &v, 1);
    return v;
}

double get_f64(std::istream& is) {
    const uint64_t bits = get_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string get_string(std::istream& is) {
    const uint64_t n = get_u64(is);
    if (n > (1ULL << 32)) throw DataError("checkpoint string length corrupt");
    std::string s(n, '\0');
    get_bytes(is, s.data(), n);
    return s;
}

Matrix get_matrix(std::istream& is) {
    const uint64_t rows = get_u64(is);
    const uint64_t cols = get_u64(is);
    if (rows > (1ULL << 24) || cols > (1ULL << 24))
        throw DataError("checkpoint matrix shape corrupt");
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    for (int i = 0; i < m.size(); ++i) m.data()[i] = get_f64(is);
    return m;
}

Vector get_vector(std::istream& is) {
    const uint64_t n = get_u64(is);
    if (n > (1ULL << 32)) throw DataError("checkpoint vector length corrupt");
    Vector v(static_cast<int>(n));
    for (int i = 0; i < v.size(); ++i) v[i] = get_f64(is);
    return v;
}

AffineLayer get_affine(std::istream& is) {
    AffineLayer layer;
    const uint8_t act = get_u8(is);
    if (act > 2) throw DataError("checkpoint activation code corrupt");
    layer.act = static_cast<Activation>(act);
    layer.weight = get_matrix(is);
    layer.bias = get_vector(is);
    return layer;
}

uint8_t phase_code(const std::string& phase) {
    if (phase == "warmup") return 0;
    if (phase == "cf") return 1;
    if (phase == "ae") return 2;
    throw Error("unknown phase '" + phase + "'");
}

std::string phase_from_code(uint8_t code) {
    switch (code) {
        case 0: return "warmup";
        case 1: return "cf";
        case 2: return "ae";
    }
    throw DataError("checkpoint phase code corrupt");
}

} // namespace

void save_checkpoint(const TrainState& state, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write checkpoint '" + path + "'");

    put_bytes(os, kMagic, 8);
    put_u32(os, kVersion);

    const Hyperparams& hp = state.hp;
    put_f64(os, hp.lambda_f);
    put_f64(os, hp.lambda_y);
    put_f64(os, hp.lambda_u);
    put_f64(os, hp.lambda_tau);
    put_f64(os, hp.lambda_alpha);
    put_f64(os, hp.lambda_n);
    put_f64(os, hp.corruption_ratio);
    put_f64(os, hp.learning_rate);
    put_f64(os, hp.momentum);
    put_i32(os, hp.num_topics);
    put_i32(os, hp.trust_rank);
    put_i32(os, hp.num_samples);
    put_i32(os, hp.epochs);
    put_i32(os, hp.inner_steps);
    put_i32(os, hp.tensor_layers);
    put_i32(os, hp.warmup_epochs);
    put_i32(os, hp.min_unique_words);
    put_u64(os, hp.seed);
    put_u8(os, hp.line_search ? 1 : 0);
    put_u8(os, hp.pin_noise_once ? 1 : 0);
    put_u8(os, hp.network_enabled ? 1 : 0);
    put_u32(os, static_cast<uint32_t>(hp.hidden.size()));
    for (int h : hp.hidden) put_i32(os, h);

    const Model& m = state.model;
    put_u8(os, static_cast<uint8_t>(m.variant));
    put_u8(os, static_cast<uint8_t>(m.composition));
    put_u8(os, m.network_enabled ? 1 : 0);

    const PgmParams& p = m.pgm;
    put_u8(os, p.trust_full_rank ? 1 : 0);
    put_matrix(os, p.legislator_ideal);
    put_matrix(os, p.bill_ideal);
    put_matrix(os, p.bill_offset);
    put_vector(os, p.bill_bias);
    put_vector(os, p.content_scale);
    put_vector(os, p.network_scale);
    put_matrix(os, p.trust_left);
    put_matrix(os, p.trust_right);

    put_u32(os, static_cast<uint32_t>(m.tensor.layers.size()));
    for (const TensorLayerParams& layer : m.tensor.layers) {
        put_matrix(os, layer.weight);
        put_vector(os, layer.bias);
    }
    put_vector(os, m.tensor.out_weight);

    put_u8(os, static_cast<uint8_t>(m.ae.kind));
    put_u32(os, static_cast<uint32_t>(m.ae.encoder.size()));
    for (const AffineLayer& layer : m.ae.encoder) put_affine(os, layer);
    put_affine(os, m.ae.code_head);
    if (m.ae.kind == AeKind::Vae) put_affine(os, m.ae.logvar_head);
    put_u32(os, static_cast<uint32_t>(m.ae.decoder.size()));
    for (const AffineLayer& layer : m.ae.decoder) put_affine(os, layer);

    put_i32(os, state.epoch);
    put_u32(os, static_cast<uint32_t>(state.history.size()));
    for (const EpochRecord& rec : state.history) {
        put_i32(os, rec.epoch);
        put_u8(os, phase_code(rec.phase));
        put_f64(os, rec.loss.kl);
        put_f64(os, rec.loss.reconstruction);
        put_f64(os, rec.loss.vote_loglik);
        put_f64(os, rec.loss.y_coupling);
        put_f64(os, rec.loss.ideal_reg);
        put_f64(os, rec.loss.tau_reg);
        put_f64(os, rec.loss.scale_reg);
        put_f64(os, rec.loss.total);
    }

    std::ostringstream rng_text;
    rng_text << state.noise_rng;
    put_string(os, rng_text.str());

    put_u8(os, state.has_pinned_noise ? 1 : 0);
    if (state.has_pinned_noise) {
        put_u32(os, static_cast<uint32_t>(state.pinned_noise.eps.size()));
        for (const Matrix& eps : state.pinned_noise.eps) put_matrix(os, eps);
        put_matrix(os, state.pinned_noise.keep_mask);
    }

    put_vector(os, state.psi1_velocity);
    put_vector(os, state.psi2_velocity);

    if (!os) throw DataError("write failed for checkpoint '" + path + "'");
}

TrainState load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint '" + path + "'");

    char magic[8];
    get_bytes(is, magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw DataError("'" + path + "' is not a checkpoint (bad magic)");
    const uint32_t version = get_u32(is);
    if (version != kVersion)
        throw DataError("checkpoint version " + std::to_string(version) + " unsupported");

    TrainState state;
    Hyperparams& hp = state.hp;
    hp.lambda_f = get_f64(is);
    hp.lambda_y = get_f64(is);
    hp.lambda_u = get_f64(is);
    hp.lambda_tau = get_f64(is);
    hp.lambda_alpha = get_f64(is);
    hp.lambda_n = get_f64(is);
    hp.corruption_ratio = get_f64(is);
    hp.learning_rate = get_f64(is);
    hp.momentum = get_f64(is);
    hp.num_topics = get_i32(is);
    hp.trust_rank = get_i32(is);
    hp.num_samples = get_i32(is);
    hp.epochs = get_i32(is);
    hp.inner_steps = get_i32(is);
    hp.tensor_layers = get_i32(is);
    hp.warmup_epochs = get_i32(is);
    hp.min_unique_words = get_i32(is);
    hp.seed = get_u64(is);
    hp.line_search = get_u8(is) != 0;
    hp.pin_noise_once = get_u8(is) != 0;
    hp.network_enabled = get_u8(is) != 0;
    hp.hidden.resize(get_u32(is));
    for (int& h : hp.hidden) h = get_i32(is);

    Model& m = state.model;
    const uint8_t variant = get_u8(is);
    if (variant > 3) throw DataError("checkpoint variant code corrupt");
    m.variant = static_cast<ModelVariant>(variant);
    const uint8_t comp = get_u8(is);
    if (comp > 1) throw DataError("checkpoint composition code corrupt");
    m.composition = static_cast<TensorComposition>(comp);
    m.network_enabled = get_u8(is) != 0;

    PgmParams& p = m.pgm;
    p.trust_full_rank = get_u8(is) != 0;
    p.legislator_ideal = get_matrix(is);
    p.bill_ideal = get_matrix(is);
    p.bill_offset = get_matrix(is);
    p.bill_bias = get_vector(is);
    p.content_scale = get_vector(is);
    p.network_scale = get_vector(is);
    p.trust_left = get_matrix(is);
    p.trust_right = get_matrix(is);
    p.check_shapes();

    const uint32_t tensor_layers = get_u32(is);
    for (uint32_t i = 0; i < tensor_layers; ++i) {
        TensorLayerParams layer;
        layer.weight = get_matrix(is);
        layer.bias = get_vector(is);
        m.tensor.layers.push_back(std::move(layer));
    }
    m.tensor.out_weight = get_vector(is);

    const uint8_t kind = get_u8(is);
    if (kind > 1) throw DataError("checkpoint autoencoder kind corrupt");
    m.ae.kind = static_cast<AeKind>(kind);
    const uint32_t enc_layers = get_u32(is);
    for (uint32_t i = 0; i < enc_layers; ++i) m.ae.encoder.push_back(get_affine(is));
    m.ae.code_head = get_affine(is);
    if (m.ae.kind == AeKind::Vae) m.ae.logvar_head = get_affine(is);
    const uint32_t dec_layers = get_u32(is);
    for (uint32_t i = 0; i < dec_layers; ++i) m.ae.decoder.push_back(get_affine(is));

    state.epoch = get_i32(is);
    const uint32_t history = get_u32(is);
    for (uint32_t i = 0; i < history; ++i) {
        EpochRecord rec;
        rec.epoch = get_i32(is);
        rec.phase = phase_from_code(get_u8(is));
        rec.loss.kl = get_f64(is);
        rec.loss.reconstruction = get_f64(is);
        rec.loss.vote_loglik = get_f64(is);
        rec.loss.y_coupling = get_f64(is);
        rec.loss.ideal_reg = get_f64(is);
        rec.loss.tau_reg = get_f64(is);
        rec.loss.scale_reg = get_f64(is);
        rec.loss.total = get_f64(is);
        state.history.push_back(std::move(rec));
    }

    std::istringstream rng_text(get_string(is));
    rng_text >> state.noise_rng;
    if (!rng_text) throw DataError("checkpoint rng state corrupt");

    state.has_pinned_noise = get_u8(is) != 0;
    if (state.has_pinned_noise) {
        const uint32_t eps_count = get_u32(is);
        for (uint32_t i = 0; i < eps_count; ++i)
            state.pinned_noise.eps.push_back(get_matrix(is));
        state.pinned_noise.keep_mask = get_matrix(is);
    }

    state.psi1_velocity = get_vector(is);
    state.psi2_velocity = get_vector(is);
    return state;
}

void write_training_log(const std::string& path, const std::vector<EpochRecord>& history) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write training log '" + path + "'");
    os << "epoch,phase,kl,reconstruction,vote_loglik,y_coupling,ideal_reg,tau_reg,"
          "scale_reg,total\n";
    for (const EpochRecord& rec : history)
        os << rec.epoch << "," << rec.phase << "," << format_g17(rec.loss.kl) << ","
           << format_g17(rec.loss.reconstruction) << "," << format_g17(rec.loss.vote_loglik)
           << "," << format_g17(rec.loss.y_coupling) << "," << format_g17(rec.loss.ideal_reg)
           << "," << format_g17(rec.loss.tau_reg) << "," << format_g17(rec.loss.scale_reg)
           << "," << format_g17(rec.loss.total) << "\n";
}

// ---------------------------------------------------------------------------
// Sweep.
// ---------------------------------------------------------------------------

std::vector<SweepRow> sweep(const Corpus& corpus, const Hyperparams& base,
                            ModelVariant variant, TensorComposition comp,
                            const std::vector<double>& lambda_y_grid,
                            const std::vector<double>& lambda_tau_grid,
                            const std::vector<int>& trust_rank_grid, int folds,
                            uint64_t seed) {
    if (lambda_y_grid.empty() || lambda_tau_grid.empty() || trust_rank_grid.empty())
        throw ConfigError("sweep: every grid axis needs at least one value");

    std::vector<SweepRow> rows;
    uint64_t point_index = 0;
    for (double ly : lambda_y_grid) {
        for (double lt : lambda_tau_grid) {
            for (int g : trust_rank_grid) {
                SweepRow row;
                row.point = {ly, lt, g};
                Hyperparams hp = base;
                hp.lambda_y = ly;
                hp.lambda_tau = lt;
                hp.trust_rank = g;
                try {
                    row.report = cross_validate(corpus, hp, variant, comp, folds,
                                                derive_seed(seed, "sweep", point_index));
                    row.ok = true;
                } catch (const Error& err) {
                    row.ok = false;
                    row.error = err.what();
                }
                rows.push_back(std::move(row));
                ++point_index;
            }
        }
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "lambda_y,lambda_tau,trust_rank,status,accuracy_mean,accuracy_2sigma,"
           "rmse_mean,rmse_2sigma,mae_mean,mae_2sigma,nall_mean,nall_2sigma,error\n";
    for (const SweepRow& row : rows) {
        out << format_g17(row.point.lambda_y) << "," << format_g17(row.point.lambda_tau)
            << "," << row.point.trust_rank << ",";
        if (row.ok) {
            out << "ok," << format_g17(row.report.mean.accuracy) << ","
                << format_g17(row.report.spread.accuracy) << ","
                << format_g17(row.report.mean.rmse) << "," << format_g17(row.report.spread.rmse)
                << "," << format_g17(row.report.mean.mae) << ","
                << format_g17(row.report.spread.mae) << "," << format_g17(row.report.mean.nall)
                << "," << format_g17(row.report.spread.nall) << ",";
        } else {
            std::string msg = row.error;
            for (char& c : msg)
                if (c == ',' || c == '\n') c = ';';
            out << "failed,,,,,,,,," << msg;
        }
        out << "\n";
    }
    return out.str();
}

} // namespace nipen
