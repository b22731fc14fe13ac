#include <cmath>
#include <vector>

#include "doctest.h"
#include "kl_oracle.hpp"
#include "sgnet/adamw.hpp"
#include "sgnet/aligner.hpp"
#include "sgnet/brain_graph.hpp"
#include "sgnet/error.hpp"
#include "sgnet/gradcheck.hpp"
#include "sgnet/rng.hpp"

using namespace sgnet;

namespace {

Matrix random_graph(std::size_t n, Rng& rng, double lo = 0.05, double hi = 0.95) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = lo + (hi - lo) * rng.uniform();
    return a;
}

bool is_valid_graph(const Matrix& g) {
    try {
        validate_adjacency(g);
        return true;
    } catch (const ContractError&) {
        return false;
    }
}

}  // namespace

TEST_CASE("kl examples") {
    CHECK(kl_gaussian(0.3, 2.0, 0.3, 2.0) == 0.0);
    CHECK(std::abs(kl_gaussian(0.0, 1.0, 1.0, 1.0) - 0.5) < 1e-9);
    const double forward = kl_gaussian(0.0, 1.0, 0.0, 4.0);
    const double reverse = kl_gaussian(0.0, 4.0, 0.0, 1.0);
    CHECK(forward == doctest::Approx(0.5 * (std::log(4.0) + 0.25 - 1.0)));
    CHECK(reverse == doctest::Approx(0.5 * (std::log(0.25) + 4.0 - 1.0)));
    CHECK(std::abs(forward - test::kl_by_integration(0, 1, 0, 2)) < 1e-6);
    CHECK(std::abs(reverse - test::kl_by_integration(0, 2, 0, 1)) < 1e-6);
    CHECK(forward != doctest::Approx(reverse));
    CHECK_THROWS_AS(kl_gaussian(0.0, 0.0, 0.0, 1.0), NumericError);
    CHECK_THROWS_AS(kl_gaussian(0.0, 1.0, 0.0, -1.0), NumericError);
}

TEST_CASE("closed-form kl matches numeric integration") {
    Rng rng(40);
    for (int k = 0; k < 20; ++k) {
        const double mq = rng.uniform(-2, 2), mp = rng.uniform(-2, 2);
        const double sq = rng.uniform(0.3, 2.0), sp = rng.uniform(0.3, 2.0);
        const double closed = kl_gaussian(mq, sq * sq, mp, sp * sp);
        CHECK(closed >= 0.0);
        CHECK(std::abs(closed - test::kl_by_integration(mq, sq, mp, sp)) < 1e-6);
    }
}

TEST_CASE("differentiable kl agrees with the scalar form") {
    Rng rng(41);
    const Matrix mu = Matrix::random_normal(5, 3, rng);
    const Matrix lv = Matrix::random_normal(5, 3, rng, 0.5);
    const Matrix pm = Matrix::random_normal(1, 3, rng);
    const Matrix pv = Matrix::random_uniform(1, 3, rng, 0.5, 2.0);
    Tape t;
    const double v = kl_gaussian(t.constant(mu), t.constant(lv), pm, pv).value()[0];
    double expected = 0.0;
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            expected += kl_gaussian(mu(r, c), std::exp(lv(r, c)), pm[c], pv[c]) / 5.0;
    CHECK(v == doctest::Approx(expected).epsilon(1e-12));
    const double zero = kl_gaussian(t.constant(Matrix(5, 3)), t.constant(Matrix(5, 3)), Matrix(1, 3),
                                    Matrix::ones(1, 3))
                            .value()[0];
    CHECK(std::abs(zero) < 1e-12);
}

TEST_CASE("aligned graphs satisfy the adjacency contract and eval is deterministic") {
    Rng rng(42);
    auto params = AlignerParams::init(AlignerDims::desk(12), rng);
    for (int k = 0; k < 5; ++k) {
        const Matrix x = random_graph(12, rng);
        Tape t;
        ForwardContext eval;
        const Matrix a = align_forward(t, t.constant(x), params, eval).graph.value();
        const Matrix b = align_forward(t, t.constant(x), params, eval).graph.value();
        CHECK(a == b);
        CHECK(is_valid_graph(a));
        Rng noise(k);
        ForwardContext train{Mode::Train, &noise, true, false};
        CHECK(is_valid_graph(align_forward(t, t.constant(x), params, train).graph.value()));
    }
}

TEST_CASE("aligner rejects invalid inputs") {
    Rng rng(43);
    auto params = AlignerParams::init(AlignerDims::desk(6), rng);
    Matrix bad = random_graph(6, rng);
    bad(0, 1) = 0.2;
    bad(1, 0) = 0.7;
    Tape t;
    CHECK_THROWS_AS(align_forward(t, t.constant(bad), params, {}), ContractError);
    CHECK_THROWS_AS(align_forward(t, t.constant(random_graph(7, rng)), params, {}), DimensionError);
}

TEST_CASE("reconstruction loss gradient through the reparameterised sample") {
    Rng rng(44);
    auto params = AlignerParams::init(AlignerDims::desk(8), rng);
    const Matrix x = random_graph(8, rng);
    auto builder = [&](Tape& t) {
        Rng noise(7);
        ForwardContext ctx{Mode::Train, &noise, true, false};
        const auto out = align_forward(t, t.constant(x), params, ctx);
        const Var diff = t.constant(x) - out.graph;
        return mean(hadamard(diff, diff));
    };
    ParamRefs refs;
    params.collect_generator(refs);
    CHECK(grad_check(builder, refs.params).max_discrepancy < 1e-4);
}

TEST_CASE("alignment loss gradient with every term active") {
    Rng rng(45);
    auto params = AlignerParams::init(AlignerDims::desk(8), rng);
    const Matrix x = random_graph(8, rng);
    const std::vector<Matrix> targets{random_graph(10, rng), random_graph(10, rng)};
    const auto prior = LatentPrior::lifted(targets, lift_projection(8, 3));
    auto builder = [&](Tape& t) {
        Rng noise(8);
        ForwardContext ctx{Mode::Train, &noise, true, false};
        const auto out = align_forward(t, t.constant(x), params, ctx);
        ForwardContext frozen = ctx;
        frozen.trainable = false;
        const Var d = latent_discriminate(t, out.code.z, params, frozen);
        return alignment_loss(t.constant(x), out.graph, out.code, prior, d, {1, 0.1, 0.001}).total;
    };
    ParamRefs refs;
    params.collect_generator(refs);
    CHECK(grad_check(builder, refs.params).max_discrepancy < 1e-4);
}

TEST_CASE("alignment loss examples") {
    Rng rng(46);
    const Matrix x = random_graph(6, rng), y = random_graph(6, rng);
    Tape t;
    LatentCode code;
    code.mu = t.constant(Matrix::random_normal(6, 4, rng));
    code.logvar = t.constant(Matrix::random_normal(6, 4, rng, 0.3));
    code.z = code.mu;
    const auto prior = LatentPrior::standard_normal(4);
    const Var d = t.constant(Matrix::scalar(0.35));

    const auto same = alignment_loss(t.constant(x), t.constant(x), code, prior, d, {});
    CHECK(same.reconstruction == 0.0);

    const auto l = alignment_loss(t.constant(x), t.constant(y), code, prior, d, {1, 0.1, 0.001});
    CHECK(l.adversarial == doctest::Approx(-std::log(0.35)));
    double rec = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) rec += (x[i] - y[i]) * (x[i] - y[i]) / 36.0;
    CHECK(l.reconstruction == doctest::Approx(rec));
    CHECK(l.kl > 0.0);
    CHECK(l.total.value()[0] ==
          doctest::Approx(l.adversarial + 0.1 * l.reconstruction + 0.001 * l.kl).epsilon(1e-14));

    const auto none = alignment_loss(t.constant(x), t.constant(y), code, prior, d, {0, 0, 0});
    CHECK(none.total.value()[0] == 0.0);
}

TEST_CASE("reparameterised samples average to the mean") {
    Rng rng(47);
    auto params = AlignerParams::init(AlignerDims::desk(6), rng);
    const Matrix x = random_graph(6, rng);
    Matrix acc(6, 8);
    Matrix mu, sigma;
    const int draws = 10000;
    Rng noise(48);
    for (int k = 0; k < draws; ++k) {
        Tape t;
        ForwardContext ctx{Mode::Train, &noise, true, false};
        params.bn1.dropout_rate = 0.0;
        params.bn2.dropout_rate = 0.0;
        const auto out = align_forward(t, t.constant(x), params, ctx);
        acc = acc + out.code.z.value();
        if (k == 0) {
            mu = out.code.mu.value();
            sigma = out.code.logvar.value();
            for (double& v : sigma.values()) v = std::exp(0.5 * v);
        }
    }
    for (std::size_t i = 0; i < acc.size(); ++i)
        CHECK(std::abs(acc[i] / draws - mu[i]) <= 3.0 * sigma[i] / std::sqrt(double(draws)));
}

TEST_CASE("latent discriminator range and symmetric point") {
    Rng rng(49);
    auto params = AlignerParams::init(AlignerDims::desk(6), rng);
    Tape t;
    for (int k = 0; k < 20; ++k) {
        const double d = latent_discriminate(t, t.constant(Matrix::random_normal(6, 8, rng, 3.0)), params, {})
                             .value()[0];
        CHECK(d > 0.0);
        CHECK(d < 1.0);
    }
    const Var z = t.constant(Matrix::random_normal(6, 8, rng));
    const Var d = latent_discriminate(t, z, params, {});
    const double loss = discriminator_loss(d, d).value()[0];
    CHECK(loss >= 2.0 * std::log(2.0) - 1e-12);
    const Var half = t.constant(Matrix::scalar(0.5));
    CHECK(discriminator_loss(half, half).value()[0] == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("latent discriminator separates two clouds") {
    Rng rng(50);
    auto params = AlignerParams::init(AlignerDims::desk(6), rng);
    ParamRefs refs;
    params.collect_discriminator(refs);
    AdamW opt;
    Matrix shift_a(1, 8), shift_b(1, 8);
    for (std::size_t k = 0; k < 8; ++k) {
        shift_a[k] = 0.5;
        shift_b[k] = -0.5;
    }
    auto cloud = [&](const Matrix& centre, Rng& r) {
        Matrix z = Matrix::random_normal(6, 8, r);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t k = 0; k < 8; ++k) z(i, k) += centre[k];
        return z;
    };
    Rng data(51);
    for (int step = 0; step < 200; ++step) {
        Tape t;
        const Var real = latent_discriminate(t, t.constant(cloud(shift_a, data)), params, {});
        const Var fake = latent_discriminate(t, t.constant(cloud(shift_b, data)), params, {});
        t.backward(discriminator_loss(real, fake));
        opt.update(refs.params, t.gradients(refs.params), 0.01);
    }
    Rng held(52);
    int correct = 0;
    for (int k = 0; k < 200; ++k) {
        Tape t;
        correct += latent_discriminate(t, t.constant(cloud(shift_a, held)), params, {}).value()[0] > 0.5;
        correct += latent_discriminate(t, t.constant(cloud(shift_b, held)), params, {}).value()[0] < 0.5;
    }
    CHECK(correct / 400.0 > 0.9);
}

TEST_CASE("lifted prior") {
    Rng rng(53);
    const std::vector<Matrix> targets{random_graph(10, rng), random_graph(10, rng)};
    const Matrix proj = lift_projection(4, 9);
    CHECK(proj == lift_projection(4, 9));
    const auto prior = LatentPrior::lifted(targets, proj, 0.1);
    REQUIRE(prior.mean.cols() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(prior.var[k] >= 0.1);
        CHECK(std::isfinite(prior.mean[k]));
    }
    const Matrix s = prior.sample(2000, rng);
    for (std::size_t k = 0; k < 4; ++k) {
        double m = 0.0;
        for (std::size_t r = 0; r < 2000; ++r) m += s(r, k) / 2000.0;
        CHECK(std::abs(m - prior.mean[k]) < 4.0 * std::sqrt(prior.var[k] / 2000.0));
    }
}

TEST_CASE("statistical alignment examples") {
    Rng rng(54);
    const Matrix x = random_graph(12, rng, 0.3, 0.6);
    const std::vector<Matrix> one{x};
    const auto st = pooled_edge_stats(one);
    const Matrix same = statistical_align(x, st.mean, st.std);
    CHECK(max_abs_diff(same, x) < 1e-12);

    const Matrix moved = statistical_align(x, 0.5, 0.05);
    CHECK(is_valid_graph(moved));
    const std::vector<Matrix> m{moved};
    CHECK(std::abs(pooled_edge_stats(m).mean - 0.5) < 0.01);

    Matrix flat(5, 5, 0.4);
    for (std::size_t i = 0; i < 5; ++i) flat(i, i) = 0.0;
    CHECK_THROWS_AS(statistical_align(flat, 0.5, 0.1), ContractError);
}
