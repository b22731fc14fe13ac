#include "sgnet/aligner.hpp"

#include <algorithm>
#include <cmath>

#include "sgnet/brain_graph.hpp"
#include "sgnet/error.hpp"
#include "sgnet/rng.hpp"

namespace sgnet {

AlignerParams AlignerParams::init(const AlignerDims& d, Rng& rng) {
    AlignerParams p;
    p.dims = d;
    p.enc1 = EdgeGcnLayer::init("align.enc1", d.nodes, d.hidden1, rng);
    p.bn1 = NormDropConfig::init("align.bn1", d.hidden1);
    p.enc2 = EdgeGcnLayer::init("align.enc2", d.hidden1, d.hidden2, rng);
    p.bn2 = NormDropConfig::init("align.bn2", d.hidden2);
    p.mu_head = EdgeGcnLayer::init("align.mu", d.hidden2, d.latent, rng);
    p.logvar_head = EdgeGcnLayer::init("align.logvar", d.hidden2, d.latent, rng);
    p.dec1 = Dense::init("align.dec1", d.latent, d.decoder_hidden, rng);
    p.dec2 = Dense::init("align.dec2", d.decoder_hidden, d.nodes, rng);
    p.disc1 = Dense::init("align_disc.fc1", d.latent, d.disc_hidden, rng);
    p.disc2 = Dense::init("align_disc.fc2", d.disc_hidden, 1, rng);
    return p;
}

void AlignerParams::collect_generator(ParamRefs& refs) {
    enc1.collect(refs);
    bn1.collect(refs);
    enc2.collect(refs);
    bn2.collect(refs);
    mu_head.collect(refs);
    logvar_head.collect(refs);
    dec1.collect(refs);
    dec2.collect(refs);
}

void AlignerParams::collect_discriminator(ParamRefs& refs) {
    disc1.collect(refs);
    disc2.collect(refs);
}

AlignOutput align_forward(Tape& t, Var x_s, AlignerParams& p, const ForwardContext& ctx,
                          bool sample) {
    validate_adjacency(x_s.value(), "align_forward input");
    if (x_s.rows() != p.dims.nodes)
        throw DimensionError("align_forward: expected " + std::to_string(p.dims.nodes) +
                             " nodes, got " + x_s.value().shape_str());
    const Var x0 = initial_features(x_s);
    Var h = tanh(norm_drop(t, edge_gcn_forward(t, x0, x_s, p.enc1, ctx), p.bn1, ctx));
    h = tanh(norm_drop(t, edge_gcn_forward(t, h, x_s, p.enc2, ctx), p.bn2, ctx));

    LatentCode code;
    code.mu = edge_gcn_forward(t, h, x_s, p.mu_head, ctx);
    code.logvar = clamp(edge_gcn_forward(t, h, x_s, p.logvar_head, ctx), -10.0, 10.0);
    if (ctx.mode == Mode::Train && sample) {
        if (!ctx.rng) throw ContractError("align_forward: train mode needs an rng");
        const Var eps = t.constant(Matrix::random_normal(code.mu.rows(), code.mu.cols(), *ctx.rng));
        code.z = code.mu + hadamard(exp(scale(code.logvar, 0.5)), eps);
    } else {
        code.z = code.mu;
    }
    const Var dec = tanh(p.dec1.forward(t, code.z, ctx));
    const Var zh = p.dec2.forward(t, dec, ctx);  // n x n embedding
    return {resolution_map(zh), code};
}

LatentPrior LatentPrior::standard_normal(std::size_t d) {
    return {Matrix(1, d), Matrix::ones(1, d)};
}

LatentPrior LatentPrior::lifted(std::span<const Matrix> target_graphs, const Matrix& projection,
                                double variance_floor) {
    if (target_graphs.empty()) throw ContractError("LatentPrior::lifted: no target graphs");
    if (projection.rows() != 2)
        throw DimensionError("LatentPrior::lifted: projection must have 2 rows, got " +
                             projection.shape_str());
    const std::size_t d = projection.cols();
    Matrix sum(1, d), sum2(1, d);
    double count = 0.0;
    for (const Matrix& g : target_graphs) {
        const std::size_t n = g.rows();
        for (std::size_t i = 0; i < n; ++i) {
            double m = 0.0, m2 = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) m += g(i, j);
            m /= static_cast<double>(n - 1);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) m2 += (g(i, j) - m) * (g(i, j) - m);
            const double sd = std::sqrt(m2 / static_cast<double>(n - 1));
            for (std::size_t k = 0; k < d; ++k) {
                const double v = m * projection(0, k) + sd * projection(1, k);
                sum[k] += v;
                sum2[k] += v * v;
            }
            count += 1.0;
        }
    }
    LatentPrior prior{Matrix(1, d), Matrix(1, d)};
    for (std::size_t k = 0; k < d; ++k) {
        prior.mean[k] = sum[k] / count;
        prior.var[k] = std::max(variance_floor, sum2[k] / count - prior.mean[k] * prior.mean[k]);
    }
    return prior;
}

Matrix LatentPrior::sample(std::size_t rows, Rng& rng) const {
    Matrix out(rows, mean.cols());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < mean.cols(); ++k)
            out(r, k) = mean[k] + std::sqrt(var[k]) * rng.normal();
    return out;
}

Matrix lift_projection(std::size_t latent_dim, std::uint64_t seed) {
    Rng rng(seed);
    return Matrix::random_normal(2, latent_dim, rng);
}

AlignLoss alignment_loss(Var x_s, Var x_hat, const LatentCode& code, const LatentPrior& prior,
                         Var disc_out, const AlignLossWeights& w) {
    if (!x_s.value().same_shape(x_hat.value()))
        throw DimensionError("alignment_loss: source " + x_s.value().shape_str() + " vs aligned " +
                             x_hat.value().shape_str());
    Tape& t = x_s.tape();
    AlignLoss out;
    std::vector<Var> terms;
    if (w.adversarial != 0.0) {
        const Var adv = scale(log(disc_out), -1.0);
        out.adversarial = adv.value()[0];
        terms.push_back(scale(adv, w.adversarial));
    }
    if (w.reconstruction != 0.0) {
        const Var diff = x_s - x_hat;
        const Var rec = mean(hadamard(diff, diff));
        out.reconstruction = rec.value()[0];
        terms.push_back(scale(rec, w.reconstruction));
    }
    if (w.kl != 0.0) {
        const Var kl = kl_gaussian(code.mu, code.logvar, prior.mean, prior.var);
        out.kl = kl.value()[0];
        terms.push_back(scale(kl, w.kl));
    }
    if (terms.empty()) {
        out.total = t.constant(Matrix::scalar(0.0));
    } else {
        out.total = terms.front();
        for (std::size_t i = 1; i < terms.size(); ++i) out.total = out.total + terms[i];
    }
    return out;
}

Var latent_discriminate(Tape& t, Var z, AlignerParams& p, const ForwardContext& ctx) {
    if (z.cols() != p.dims.latent)
        throw DimensionError("latent_discriminate: latent " + z.value().shape_str() +
                             " vs latent dim " + std::to_string(p.dims.latent));
    const Var h = leaky_relu(p.disc1.forward(t, mean_pool(z), ctx));
    return sigmoid(p.disc2.forward(t, h, ctx));
}

EdgeStats pooled_edge_stats(std::span<const Matrix> graphs) {
    double s = 0.0, count = 0.0;
    for (const Matrix& g : graphs)
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = i + 1; j < g.cols(); ++j) {
                s += g(i, j);
                count += 1.0;
            }
    if (count == 0.0) throw ContractError("pooled_edge_stats: no edges");
    EdgeStats st;
    st.mean = s / count;
    double s2 = 0.0;
    for (const Matrix& g : graphs)
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = i + 1; j < g.cols(); ++j) s2 += (g(i, j) - st.mean) * (g(i, j) - st.mean);
    st.std = std::sqrt(s2 / count);
    return st;
}

Matrix statistical_align(const Matrix& x_s, double target_mean, double target_std) {
    validate_adjacency(x_s, "statistical_align input");
    if (!(target_std >= 0.0)) throw ContractError("statistical_align: negative target std");
    const EdgeStats src = pooled_edge_stats(std::span<const Matrix>(&x_s, 1));
    if (src.std <= 1e-12) throw ContractError("statistical_align: input graph is constant");
    const std::size_t n = x_s.rows();
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double z = (x_s(i, j) - src.mean) / src.std;
            out(i, j) = out(j, i) = std::clamp(target_mean + target_std * z, 0.0, 1.0);
        }
    return out;
}

}  // namespace sgnet
