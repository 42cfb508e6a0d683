#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

namespace nipen {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Numerically stable scalar kernels.
// ---------------------------------------------------------------------------

// log(1 + exp(x)) without overflow for large |x|.
double softplus(double x);

// 1 / (1 + exp(-x)), branching on the sign of x so exp never overflows.
double sigmoid(double x);

// log(sigmoid(x)) = -softplus(-x); stays finite for very negative x.
double log_sigmoid(double x);

Matrix sigmoid(const Matrix& x);

// ---------------------------------------------------------------------------
// Affine layers.
// ---------------------------------------------------------------------------

enum class Activation { Sigmoid, Tanh, Identity };

// Fully connected layer: rows of the input are samples.
// output = act(input * weight + bias^T), weight is (in x out).
struct AffineLayer {
    Matrix weight;
    Vector bias;
    Activation act = Activation::Identity;

    int in_dim() const { return static_cast<int>(weight.rows()); }
    int out_dim() const { return static_cast<int>(weight.cols()); }
};

Matrix affine_forward(const AffineLayer& layer, const Matrix& input);

struct AffineGrads {
    Matrix dweight;
    Vector dbias;
    Matrix dinput;
};

// Backward pass for one layer. `upstream` is dL/d(output); recomputes the
// forward activation internally. Zero upstream yields zero gradients.
AffineGrads affine_backward(const AffineLayer& layer, const Matrix& input,
                            const Matrix& upstream);

// ---------------------------------------------------------------------------
// Finite-difference gradient checking.
// ---------------------------------------------------------------------------

struct GradCheckReport {
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
    int worst_index = -1;
    bool pass = false;
};

// Compares grad_fn(params) against central differences of loss_fn with the
// given step. Per-coordinate relative error uses denominator
// max(1e-3, |analytic| + |numeric|), so near-zero coordinates are compared
// on an absolute 1e-3 scale.
GradCheckReport check_gradients(const std::function<double(const Vector&)>& loss_fn,
                                const std::function<Vector(const Vector&)>& grad_fn,
                                const Vector& params, double step, double tol);

// ---------------------------------------------------------------------------
// Deterministic random draws.
//
// All randomness in the library flows through mt19937_64 streams created by
// substream(), so one run seed fans out into named, order-independent
// streams. Draw helpers below are stateless (no cached spare values), which
// keeps checkpoint resume bit-exact.
// ---------------------------------------------------------------------------

std::mt19937_64 substream(uint64_t seed, std::string_view name, uint64_t index = 0);

// First output of the named substream, for seeding nested runs (folds,
// sweep points) independently.
uint64_t derive_seed(uint64_t seed, std::string_view name, uint64_t index = 0);

double uniform01(std::mt19937_64& rng);          // [0, 1)
double draw_normal(std::mt19937_64& rng);        // N(0, 1), Box-Muller, 2 draws
Matrix draw_normal_matrix(int rows, int cols, std::mt19937_64& rng);
Vector draw_normal_vector(int n, std::mt19937_64& rng);

// In-place Fisher-Yates with an explicit rejection-sampled bounded draw.
void shuffle_indices(std::vector<int>& idx, std::mt19937_64& rng);

// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
void init_affine(AffineLayer& layer, std::mt19937_64& rng);

} // namespace nipen
