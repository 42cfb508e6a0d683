#include <doctest.h>

#include <cmath>

#include "nipen/error.hpp"
#include "nipen/nn.hpp"

using namespace nipen;

TEST_CASE("stable scalar kernels") {
    CHECK(sigmoid(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sigmoid(1000.0) == 1.0);
    CHECK(sigmoid(-1000.0) >= 0.0); // e^-1000 underflows; 0 is the rounded value
    CHECK(std::isfinite(log_sigmoid(-1000.0)));
    CHECK(log_sigmoid(-1000.0) == doctest::Approx(-1000.0).epsilon(1e-12));
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(softplus(800.0) == doctest::Approx(800.0).epsilon(1e-12));
    // Identity with the naive formula where it is safe.
    for (double x : {-20.0, -3.0, -0.5, 0.0, 0.7, 4.0, 25.0}) {
        CHECK(sigmoid(x) == doctest::Approx(1.0 / (1.0 + std::exp(-x))).epsilon(1e-14));
        CHECK(log_sigmoid(x) == doctest::Approx(std::log(sigmoid(x))).epsilon(1e-12));
    }
}

TEST_CASE("affine forward basics") {
    AffineLayer layer;
    layer.weight = Matrix::Identity(3, 3);
    layer.bias = Vector::Zero(3);

    Matrix input(2, 3);
    input << 1.0, -2.0, 0.5, 0.0, 3.0, -1.0;

    SUBCASE("identity weights pass the input through") {
        layer.act = Activation::Identity;
        CHECK((affine_forward(layer, input) - input).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("sigmoid of a zero row is one half everywhere") {
        layer.act = Activation::Sigmoid;
        const Matrix out = affine_forward(layer, Matrix::Zero(1, 3));
        for (int c = 0; c < 3; ++c) CHECK(out(0, c) == 0.5);
    }
    SUBCASE("tanh of zero is zero") {
        layer.act = Activation::Tanh;
        CHECK(affine_forward(layer, Matrix::Zero(1, 3))(0, 0) == 0.0);
    }
    SUBCASE("width mismatch is an error") {
        layer.act = Activation::Identity;
        CHECK_THROWS_AS(affine_forward(layer, Matrix::Zero(1, 4)), Error);
    }
}

TEST_CASE("affine backward") {
    std::mt19937_64 rng(11);
    AffineLayer layer;
    layer.weight = draw_normal_matrix(3, 4, rng);
    layer.bias = draw_normal_vector(4, rng);
    const Matrix input = draw_normal_matrix(2, 3, rng);

    SUBCASE("identity activation, upstream of ones sums into the bias") {
        layer.act = Activation::Identity;
        const AffineGrads g = affine_backward(layer, input, Matrix::Ones(2, 4));
        for (int c = 0; c < 4; ++c) CHECK(g.dbias[c] == doctest::Approx(2.0));
    }
    SUBCASE("zero upstream zeroes every gradient") {
        layer.act = Activation::Sigmoid;
        const AffineGrads g = affine_backward(layer, input, Matrix::Zero(2, 4));
        CHECK(g.dweight.cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.dbias.cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.dinput.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("gradients match central differences for every activation") {
        const Matrix coeff = draw_normal_matrix(2, 4, rng); // fixed linear readout
        for (Activation act :
             {Activation::Sigmoid, Activation::Tanh, Activation::Identity}) {
            layer.act = act;

            // Parameters flattened as [weight, bias, input].
            const int nw = 12, nb = 4, ni = 6;
            const auto unflatten = [&](const Vector& p) {
                AffineLayer l = layer;
                Matrix in = input;
                int c = 0;
                for (int i = 0; i < nw; ++i) l.weight.data()[i] = p[c++];
                for (int i = 0; i < nb; ++i) l.bias[i] = p[c++];
                for (int i = 0; i < ni; ++i) in.data()[i] = p[c++];
                return std::make_pair(l, in);
            };
            Vector params(nw + nb + ni);
            {
                int c = 0;
                for (int i = 0; i < nw; ++i) params[c++] = layer.weight.data()[i];
                for (int i = 0; i < nb; ++i) params[c++] = layer.bias[i];
                for (int i = 0; i < ni; ++i) params[c++] = input.data()[i];
            }
            const auto loss = [&](const Vector& p) {
                const auto [l, in] = unflatten(p);
                return affine_forward(l, in).cwiseProduct(coeff).sum();
            };
            const auto grad = [&](const Vector& p) {
                const auto [l, in] = unflatten(p);
                const AffineGrads g = affine_backward(l, in, coeff);
                Vector out(nw + nb + ni);
                int c = 0;
                for (int i = 0; i < nw; ++i) out[c++] = g.dweight.data()[i];
                for (int i = 0; i < nb; ++i) out[c++] = g.dbias[i];
                for (int i = 0; i < ni; ++i) out[c++] = g.dinput.data()[i];
                return out;
            };
            const GradCheckReport report = check_gradients(loss, grad, params, 1e-5, 1e-5);
            CHECK(report.pass);
        }
    }
}

TEST_CASE("gradient checker") {
    const Vector p = (Vector(3) << 0.4, -1.2, 2.0).finished();
    const auto quad = [](const Vector& v) { return 0.5 * v.squaredNorm(); };

    SUBCASE("exact gradient of a quadratic") {
        const GradCheckReport r =
            check_gradients(quad, [](const Vector& v) { return v; }, p, 1e-5, 1e-8);
        CHECK(r.pass);
        CHECK(r.max_rel_err < 1e-8);
    }
    SUBCASE("a doubled gradient is rejected") {
        const GradCheckReport r = check_gradients(
            quad, [](const Vector& v) { return Vector(2.0 * v); }, p, 1e-5, 1e-4);
        CHECK_FALSE(r.pass);
        CHECK(r.worst_index >= 0);
    }
}

TEST_CASE("deterministic draws") {
    SUBCASE("substreams are reproducible and name-separated") {
        std::mt19937_64 a = substream(7, "init");
        std::mt19937_64 b = substream(7, "init");
        std::mt19937_64 c = substream(7, "vae-noise");
        CHECK(a() == b());
        CHECK(substream(7, "init")() != c());
        CHECK(derive_seed(7, "fold", 0) != derive_seed(7, "fold", 1));
        CHECK(derive_seed(7, "fold", 2) == derive_seed(7, "fold", 2));
    }
    SUBCASE("uniform01 stays inside [0, 1)") {
        std::mt19937_64 rng(3);
        for (int i = 0; i < 1000; ++i) {
            const double u = uniform01(rng);
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
        }
    }
    SUBCASE("normal draws have roughly unit scale") {
        std::mt19937_64 rng(5);
        double sum = 0.0, sumsq = 0.0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const double x = draw_normal(rng);
            sum += x;
            sumsq += x * x;
        }
        CHECK(std::abs(sum / n) < 0.05);
        CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.05));
    }
    SUBCASE("shuffle is a permutation") {
        std::vector<int> idx = {0, 1, 2, 3, 4, 5, 6, 7};
        std::mt19937_64 rng(9);
        shuffle_indices(idx, rng);
        std::vector<int> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < 8; ++i) CHECK(sorted[i] == i);
    }
    SUBCASE("init_affine bounds weights by the fan-in scale") {
        AffineLayer layer;
        layer.weight = Matrix::Zero(16, 8);
        layer.bias = Vector::Ones(8);
        std::mt19937_64 rng(13);
        init_affine(layer, rng);
        CHECK(layer.weight.cwiseAbs().maxCoeff() <= 0.25);
        CHECK(layer.weight.cwiseAbs().maxCoeff() > 0.0);
        CHECK(layer.bias.cwiseAbs().maxCoeff() == 0.0);
    }
}
