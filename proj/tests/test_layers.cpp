#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "sgnet/error.hpp"
#include "sgnet/gradcheck.hpp"
#include "sgnet/layers.hpp"
#include "sgnet/rng.hpp"

using namespace sgnet;

namespace {

Matrix random_symmetric(std::size_t n, Rng& rng, double density = 0.7) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = rng.uniform() < density ? rng.uniform() : 0.0;
            a(i, j) = a(j, i) = w;
        }
    return a;
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(p[i], p[rng.uniform_index(i + 1)]);
    return p;
}

// Row i of the result is row perm[i] of m.
Matrix permute_rows(const Matrix& m, const std::vector<std::size_t>& perm) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(perm[i], j);
    return out;
}

Matrix permute_both(const Matrix& a, const std::vector<std::size_t>& perm) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(perm[i], perm[j]);
    return out;
}

void zero(Parameter& p) { p.value.fill(0.0); }

// Direct evaluation of the edge-conditioned aggregation with explicit filters.
Matrix edge_gcn_reference(const Matrix& x, const Matrix& a, const EdgeGcnLayer& layer) {
    const std::size_t n = a.rows();
    Matrix out(n, layer.d_out);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t o = 0; o < layer.d_out; ++o) {
            double v = layer.bias.value[o];
            for (std::size_t i = 0; i < layer.d_in; ++i) v += layer.self_weight.value(o, i) * x(k, i);
            out(k, o) = v;
        }
        std::size_t deg = 0;
        for (std::size_t l = 0; l < n; ++l) deg += a(k, l) > 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            if (!(a(k, l) > 0.0)) continue;
            const Matrix theta = edge_filter(layer, a(k, l));
            for (std::size_t o = 0; o < layer.d_out; ++o) {
                double m = 0.0;
                for (std::size_t i = 0; i < layer.d_in; ++i) m += theta(o, i) * x(l, i);
                out(k, o) += m / static_cast<double>(deg);
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("edge gcn on an empty graph keeps only the self term") {
    Rng rng(1);
    auto layer = EdgeGcnLayer::init("e", 4, 3, rng);
    const Matrix x = Matrix::random_normal(5, 4, rng);
    Tape t;
    const ForwardContext ctx;
    const Matrix out = edge_gcn_forward(t, t.constant(x), t.constant(Matrix(5, 5)), layer, ctx).value();
    const Matrix expected = matmul(x, layer.self_weight.value.transposed());
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            CHECK(out(r, c) == doctest::Approx(expected(r, c) + layer.bias.value[c]).epsilon(1e-14));
}

TEST_CASE("edge gcn on a path averages neighbour rows under an identity filter") {
    Rng rng(2);
    auto layer = EdgeGcnLayer::init("e", 3, 3, rng);
    zero(layer.filter_w1);
    zero(layer.filter_b1);
    zero(layer.self_weight);
    zero(layer.bias);
    layer.filter_b2.value = Matrix(1, 9, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    const Matrix a{{0, 0.7, 0}, {0.7, 0, 0.3}, {0, 0.3, 0}};
    Tape t;
    const Matrix out =
        edge_gcn_forward(t, t.constant(Matrix::identity(3)), t.constant(a), layer, {}).value();
    CHECK(out(1, 0) == doctest::Approx(0.5));
    CHECK(out(1, 1) == doctest::Approx(0.0));
    CHECK(out(1, 2) == doctest::Approx(0.5));
    CHECK(out(0, 1) == doctest::Approx(1.0));
    CHECK(out(2, 1) == doctest::Approx(1.0));
}

TEST_CASE("edge gcn matches an explicit per-edge filter evaluation") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        auto layer = EdgeGcnLayer::init("e", 3, 2, rng);
        layer.filter_b2.value = Matrix::random_normal(1, 6, rng);
        const Matrix a = random_symmetric(6, rng, 0.5);
        const Matrix x = Matrix::random_normal(6, 3, rng);
        Tape t;
        const Matrix out = edge_gcn_forward(t, t.constant(x), t.constant(a), layer, {}).value();
        CHECK(max_abs_diff(out, edge_gcn_reference(x, a, layer)) < 1e-12);
    }
}

TEST_CASE("edge gcn rejects a feature matrix with the wrong row count") {
    Rng rng(3);
    auto layer = EdgeGcnLayer::init("e", 2, 2, rng);
    Tape t;
    CHECK_THROWS_AS(edge_gcn_forward(t, t.constant(Matrix(4, 2)), t.constant(Matrix(5, 5)), layer, {}),
                    DimensionError);
}

TEST_CASE("edge gcn gradients match finite differences") {
    Rng rng(4);
    auto layer = EdgeGcnLayer::init("e", 3, 2, rng);
    layer.filter_b2.value = Matrix::random_normal(1, 6, rng, 0.5);
    Parameter adj("adj", Matrix::random_uniform(5, 5, rng, 0.1, 1.0));
    const Matrix x = Matrix::random_normal(5, 3, rng);
    Parameter* ps[] = {&layer.filter_w1, &layer.filter_b1, &layer.filter_w2,
                       &layer.filter_b2, &layer.self_weight, &layer.bias};
    auto builder = [&](Tape& t) {
        return sum(edge_gcn_forward(t, t.constant(x), t.constant(adj.value), layer, {}));
    };
    CHECK(grad_check(builder, ps).max_discrepancy < 1e-4);

    // Through the adjacency as well, which is how the aligner feeds the generator.
    auto through_adj = [&](Tape& t) {
        Matrix off = Matrix::ones(5, 5);
        for (std::size_t i = 0; i < 5; ++i) off(i, i) = 0.0;
        const Var a = hadamard(t.param(adj), t.constant(off));
        return sum(tanh(edge_gcn_forward(t, t.constant(x), a, layer, {})));
    };
    Parameter* pa[] = {&adj};
    CHECK(grad_check(through_adj, pa).max_discrepancy < 1e-4);
}

TEST_CASE("node gcn examples") {
    Rng rng(5);
    auto layer = NodeGcnLayer::init("n", 3, 3, rng);
    layer.weight.value = Matrix::identity(3);
    zero(layer.bias);
    const Matrix x = Matrix::random_normal(3, 3, rng);
    {
        Tape t;
        const Matrix out = node_gcn_forward(t, t.constant(x), t.constant(Matrix(3, 3)), layer, {}).value();
        CHECK(max_abs_diff(out, x) < 1e-15);
    }
    {
        const Matrix k3{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
        Tape t;
        const Matrix out =
            node_gcn_forward(t, t.constant(Matrix::identity(3)), t.constant(k3), layer, {}).value();
        for (double v : out.values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
    Tape t;
    CHECK_THROWS_AS(node_gcn_forward(t, t.constant(Matrix(2, 3)), t.constant(Matrix(3, 3)), layer, {}),
                    DimensionError);
}

TEST_CASE("graph convolutions are permutation equivariant") {
    for (std::uint64_t seed = 10; seed < 20; ++seed) {
        Rng rng(seed);
        const std::size_t n = 7;
        const Matrix a = random_symmetric(n, rng, 0.6);
        const Matrix x = Matrix::random_normal(n, 4, rng);
        const auto perm = random_permutation(n, rng);
        auto edge = EdgeGcnLayer::init("e", 4, 3, rng);
        auto node = NodeGcnLayer::init("n", 4, 3, rng);

        Tape t;
        const Matrix pa = permute_both(a, perm), px = permute_rows(x, perm);
        const Matrix e1 = edge_gcn_forward(t, t.constant(x), t.constant(a), edge, {}).value();
        const Matrix e2 = edge_gcn_forward(t, t.constant(px), t.constant(pa), edge, {}).value();
        CHECK(max_abs_diff(permute_rows(e1, perm), e2) < 1e-12);
        const Matrix n1 = node_gcn_forward(t, t.constant(x), t.constant(a), node, {}).value();
        const Matrix n2 = node_gcn_forward(t, t.constant(px), t.constant(pa), node, {}).value();
        CHECK(max_abs_diff(permute_rows(n1, perm), n2) < 1e-12);
    }
}

TEST_CASE("node gcn gradients match finite differences") {
    Rng rng(6);
    auto layer = NodeGcnLayer::init("n", 4, 3, rng);
    Parameter adj("adj", random_symmetric(5, rng, 0.8));
    Parameter x("x", Matrix::random_normal(5, 4, rng));
    auto builder = [&](Tape& t) {
        return sum(tanh(node_gcn_forward(t, t.param(x), t.param(adj), layer, {})));
    };
    Parameter* ps[] = {&layer.weight, &layer.bias, &x, &adj};
    CHECK(grad_check(builder, ps).max_discrepancy < 1e-4);
}

TEST_CASE("resolution map examples") {
    SUBCASE("orthonormal columns give the empty graph") {
        // Columns of a 4x3 slice of a Householder reflection are orthonormal.
        Matrix v{{1}, {2}, {-1}, {0.5}};
        const double vv = frobenius_norm(v) * frobenius_norm(v);
        Matrix q = Matrix::identity(4) - (2.0 / vv) * matmul(v, v.transposed());
        Matrix z(4, 3);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 3; ++j) z(i, j) = q(i, j);
        Tape t;
        const Matrix g = resolution_map(t.constant(z)).value();
        for (double e : g.values()) CHECK(std::abs(e) < 1e-12);
    }
    SUBCASE("random 35x160 embedding") {
        Rng rng(7);
        Tape t;
        const Matrix g = resolution_map(t.constant(Matrix::random_normal(35, 160, rng))).value();
        REQUIRE(g.rows() == 160);
        REQUIRE(g.cols() == 160);
        double top = 0.0;
        for (std::size_t i = 0; i < 160; ++i) {
            CHECK(g(i, i) == 0.0);
            for (std::size_t j = 0; j < 160; ++j) {
                CHECK(std::abs(g(i, j) - g(j, i)) <= 1e-12);
                CHECK(g(i, j) >= 0.0);
                CHECK(g(i, j) <= 1.0);
                top = std::max(top, g(i, j));
            }
        }
        CHECK(top == 1.0);
    }
    SUBCASE("all-ones 2x3") {
        Tape t;
        const Matrix g = resolution_map(t.constant(Matrix::ones(2, 3))).value();
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(g(i, j) == (i == j ? 0.0 : 1.0));
    }
}

TEST_CASE("resolution map gradients match finite differences") {
    Rng rng(8);
    Parameter z("z", Matrix::random_normal(4, 5, rng));
    const Matrix weights = Matrix::random_normal(5, 5, rng);
    auto builder = [&](Tape& t) {
        return sum(hadamard(resolution_map(t.param(z)), t.constant(weights)));
    };
    Parameter* ps[] = {&z};
    CHECK(grad_check(builder, ps).max_discrepancy < 1e-4);
}

TEST_CASE("norm_drop in eval mode is deterministic and unmasked") {
    Rng rng(9);
    auto cfg = NormDropConfig::init("bn", 3);
    cfg.dropout_rate = 0.5;
    cfg.running_mean = Matrix(1, 3, {0.1, -0.2, 0.3});
    cfg.running_var = Matrix(1, 3, {1.5, 0.5, 2.0});
    const Matrix x = Matrix::random_normal(6, 3, rng);
    ForwardContext ctx;
    ctx.mode = Mode::Eval;
    Tape t;
    const Matrix a = norm_drop(t, t.constant(x), cfg, ctx).value();
    const Matrix b = norm_drop(t, t.constant(x), cfg, ctx).value();
    CHECK(a == b);
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = 0; c < 3; ++c) {
            const double expected = (x(r, c) - cfg.running_mean[c]) /
                                    std::sqrt(cfg.running_var[c] + cfg.variance_floor);
            CHECK(a(r, c) == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("norm_drop with input statistics in eval mode matches train mode without dropout") {
    auto cfg = NormDropConfig::init("bn", 4);
    cfg.dropout_rate = 0.0;
    cfg.eval_input_stats = true;
    cfg.running_mean = Matrix(1, 4, 5.0);
    Rng data(17);
    const Matrix x = Matrix::random_normal(7, 4, data);
    Rng rng(18);
    Tape t;
    const Matrix train = norm_drop(t, t.constant(x), cfg, {Mode::Train, &rng, true, false}).value();
    const Matrix eval = norm_drop(t, t.constant(x), cfg, {Mode::Eval}).value();
    CHECK(train == eval);
    CHECK(cfg.running_mean == Matrix(1, 4, 5.0));
}

TEST_CASE("norm_drop standardises constant columns to the shift") {
    auto cfg = NormDropConfig::init("bn", 2);
    cfg.dropout_rate = 0.0;
    cfg.shift.value = Matrix(1, 2, {0.25, -1.5});
    cfg.gain.value = Matrix(1, 2, {3.0, 2.0});
    Matrix x(5, 2);
    for (std::size_t r = 0; r < 5; ++r) {
        x(r, 0) = 4.0;
        x(r, 1) = -7.0;
    }
    Rng rng(10);
    ForwardContext ctx{Mode::Train, &rng};
    Tape t;
    const Matrix out = norm_drop(t, t.constant(x), cfg, ctx).value();
    for (std::size_t r = 0; r < 5; ++r) {
        CHECK(out(r, 0) == doctest::Approx(0.25));
        CHECK(out(r, 1) == doctest::Approx(-1.5));
    }
    CHECK(cfg.running_mean[0] == doctest::Approx(0.4));
    CHECK(cfg.running_var[0] == doctest::Approx(0.9));
}

TEST_CASE("norm_drop zeroes about the dropout rate in train mode") {
    auto cfg = NormDropConfig::init("bn", 100);
    Rng data(11);
    const Matrix x = Matrix::random_normal(100, 100, data);
    Rng rng(12);
    ForwardContext ctx{Mode::Train, &rng};
    Tape t;
    const Matrix out = norm_drop(t, t.constant(x), cfg, ctx).value();
    const auto zeros = std::count(out.values().begin(), out.values().end(), 0.0);
    CHECK(static_cast<double>(zeros) / 1e4 == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("norm_drop needs two rows in train mode") {
    auto cfg = NormDropConfig::init("bn", 3);
    Rng rng(13);
    ForwardContext ctx{Mode::Train, &rng};
    Tape t;
    CHECK_THROWS_AS(norm_drop(t, t.constant(Matrix(1, 3)), cfg, ctx), ContractError);
    ctx.mode = Mode::Eval;
    CHECK_NOTHROW(norm_drop(t, t.constant(Matrix(1, 3)), cfg, ctx));
}

TEST_CASE("norm_drop leaves running statistics alone when asked") {
    auto cfg = NormDropConfig::init("bn", 2);
    Rng rng(14);
    ForwardContext ctx{Mode::Train, &rng};
    ctx.update_running_stats = false;
    Tape t;
    norm_drop(t, t.constant(Matrix::random_normal(4, 2, rng)), cfg, ctx);
    CHECK(cfg.running_mean == Matrix(1, 2));
    CHECK(cfg.running_var == Matrix::ones(1, 2));
}

TEST_CASE("norm_drop gradients match finite differences") {
    auto cfg = NormDropConfig::init("bn", 3);
    Rng data(15);
    cfg.gain.value = Matrix::random_uniform(1, 3, data, 0.5, 1.5);
    cfg.shift.value = Matrix::random_normal(1, 3, data);
    Parameter x("x", Matrix::random_normal(6, 3, data));
    const Matrix weights = Matrix::random_normal(6, 3, data);
    auto builder = [&](Tape& t) {
        Rng rng(16);
        ForwardContext ctx{Mode::Train, &rng, true, false};
        return sum(hadamard(norm_drop(t, t.param(x), cfg, ctx), t.constant(weights)));
    };
    Parameter* ps[] = {&cfg.gain, &cfg.shift, &x};
    CHECK(grad_check(builder, ps).max_discrepancy < 1e-4);
}

TEST_CASE("frozen parameters receive no gradient") {
    Rng rng(17);
    auto layer = Dense::init("d", 3, 2, rng);
    const Matrix x = Matrix::random_normal(4, 3, rng);
    Tape t;
    ForwardContext ctx;
    ctx.trainable = false;
    const Var out = sum(layer.forward(t, t.constant(x), ctx));
    CHECK_FALSE(out.requires_grad());
}

TEST_CASE("dense gradients match finite differences") {
    Rng rng(18);
    auto layer = Dense::init("d", 3, 2, rng);
    const Matrix x = Matrix::random_normal(4, 3, rng);
    auto builder = [&](Tape& t) { return sum(tanh(layer.forward(t, t.constant(x), {}))); };
    Parameter* ps[] = {&layer.weight, &layer.bias};
    CHECK(grad_check(builder, ps).max_discrepancy < 1e-4);
}
