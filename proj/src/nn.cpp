#include "nipen/nn.hpp"

#include <cmath>
#include <cstring>

#include "nipen/error.hpp"

namespace nipen {

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_sigmoid(double x) { return -softplus(-x); }

Matrix sigmoid(const Matrix& x) {
    return x.unaryExpr([](double v) { return sigmoid(v); });
}

namespace {

Matrix apply_activation(Activation act, const Matrix& pre) {
    switch (act) {
        case Activation::Sigmoid: return sigmoid(pre);
        case Activation::Tanh: return pre.array().tanh().matrix();
        case Activation::Identity: return pre;
    }
    throw Error("unknown activation");
}

// Derivative expressed through the activation output.
Matrix activation_grad(Activation act, const Matrix& out) {
    switch (act) {
        case Activation::Sigmoid: return (out.array() * (1.0 - out.array())).matrix();
        case Activation::Tanh: return (1.0 - out.array().square()).matrix();
        case Activation::Identity: return Matrix::Ones(out.rows(), out.cols());
    }
    throw Error("unknown activation");
}

} // namespace

Matrix affine_forward(const AffineLayer& layer, const Matrix& input) {
    if (input.cols() != layer.weight.rows())
        throw Error("affine_forward: input width " + std::to_string(input.cols()) +
                    " does not match layer fan-in " + std::to_string(layer.weight.rows()));
    Matrix pre = input * layer.weight;
    pre.rowwise() += layer.bias.transpose();
    return apply_activation(layer.act, pre);
}

AffineGrads affine_backward(const AffineLayer& layer, const Matrix& input,
                            const Matrix& upstream) {
    const Matrix out = affine_forward(layer, input);
    const Matrix dpre = upstream.cwiseProduct(activation_grad(layer.act, out));
    AffineGrads g;
    g.dweight = input.transpose() * dpre;
    g.dbias = dpre.colwise().sum().transpose();
    g.dinput = dpre * layer.weight.transpose();
    return g;
}

GradCheckReport check_gradients(const std::function<double(const Vector&)>& loss_fn,
                                const std::function<Vector(const Vector&)>& grad_fn,
                                const Vector& params, double step, double tol) {
    const Vector analytic = grad_fn(params);
    if (analytic.size() != params.size())
        throw Error("check_gradients: gradient size mismatch");

    GradCheckReport report;
    Vector probe = params;
    for (int i = 0; i < params.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + step;
        const double up = loss_fn(probe);
        probe[i] = saved - step;
        const double down = loss_fn(probe);
        probe[i] = saved;

        const double numeric = (up - down) / (2.0 * step);
        const double abs_err = std::abs(analytic[i] - numeric);
        const double denom = std::max(1e-3, std::abs(analytic[i]) + std::abs(numeric));
        const double rel_err = abs_err / denom;
        if (rel_err > report.max_rel_err) {
            report.max_rel_err = rel_err;
            report.worst_index = i;
        }
        report.max_abs_err = std::max(report.max_abs_err, abs_err);
    }
    report.pass = report.max_rel_err <= tol;
    return report;
}

namespace {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::mt19937_64 substream(uint64_t seed, std::string_view name, uint64_t index) {
    // FNV-1a over the stream name, mixed with seed and index through splitmix64.
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    uint64_t state = seed;
    uint64_t mixed = splitmix64(state) ^ h;
    state = mixed + index * 0x9e3779b97f4a7c15ULL;
    return std::mt19937_64(splitmix64(state));
}

uint64_t derive_seed(uint64_t seed, std::string_view name, uint64_t index) {
    std::mt19937_64 rng = substream(seed, name, index);
    return rng();
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double draw_normal(std::mt19937_64& rng) {
    // Box-Muller; the second variate is discarded so no state survives a draw.
    double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Matrix draw_normal_matrix(int rows, int cols, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = draw_normal(rng);
    return m;
}

Vector draw_normal_vector(int n, std::mt19937_64& rng) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = draw_normal(rng);
    return v;
}

namespace {

// Unbiased draw from [0, bound) by rejection on the top of the 64-bit range.
uint64_t bounded_rand(std::mt19937_64& rng, uint64_t bound) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % bound;
}

} // namespace

void shuffle_indices(std::vector<int>& idx, std::mt19937_64& rng) {
    for (size_t i = idx.size(); i > 1; --i) {
        const size_t j = bounded_rand(rng, i);
        std::swap(idx[i - 1], idx[j]);
    }
}

void init_affine(AffineLayer& layer, std::mt19937_64& rng) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.weight.rows()));
    for (int r = 0; r < layer.weight.rows(); ++r)
        for (int c = 0; c < layer.weight.cols(); ++c)
            layer.weight(r, c) = (2.0 * uniform01(rng) - 1.0) * scale;
    layer.bias.setZero();
}

} // namespace nipen
