#pragma once

// Source-to-target aligner: a variational edge-GCN encoder, a decoder back to
// the source resolution and a latent discriminator, plus the moment-matching
// baseline.

#include <cstddef>
#include <span>

#include "sgnet/autodiff.hpp"
#include "sgnet/gaussian_kl.hpp"
#include "sgnet/layers.hpp"

namespace sgnet {

struct AlignerDims {
    std::size_t nodes = 35;
    std::size_t hidden1 = 32;
    std::size_t hidden2 = 32;
    std::size_t latent = 16;
    std::size_t decoder_hidden = 32;
    std::size_t disc_hidden = 16;

    static AlignerDims paper() { return {}; }
    static AlignerDims desk(std::size_t nodes) { return {nodes, 16, 16, 8, 16, 8}; }
};

struct AlignerParams {
    AlignerDims dims;
    EdgeGcnLayer enc1, enc2, mu_head, logvar_head;
    NormDropConfig bn1, bn2;
    Dense dec1, dec2;
    Dense disc1, disc2;

    static AlignerParams init(const AlignerDims& dims, Rng& rng);
    /// Encoder and decoder (the aligner proper).
    void collect_generator(ParamRefs& refs);
    void collect_discriminator(ParamRefs& refs);
};

struct LatentCode {
    Var mu;
    Var logvar;  // clamped to [-10, 10]
    Var z;
};

struct AlignOutput {
    Var graph;  // n x n, symmetric, zero diagonal, entries in [0,1]
    LatentCode code;
};

/// Encodes, samples z = mu + exp(logvar/2) * eps in train mode (z = mu in eval
/// mode or when `sample` is false) and decodes through the resolution map.
AlignOutput align_forward(Tape& t, Var x_s, AlignerParams& p, const ForwardContext& ctx,
                          bool sample = true);

/// Diagonal Gaussian over latent dimensions that D_align treats as "real" and
/// that the KL term pulls the aligned code towards.
struct LatentPrior {
    Matrix mean;  // 1 x d
    Matrix var;   // 1 x d

    static LatentPrior standard_normal(std::size_t d);
    /// Per-node (mean, std) of each target graph's edge weights, mapped to the
    /// latent dimension by `projection` (2 x d), then fitted per dimension.
    /// Variances below `variance_floor` are raised to it.
    static LatentPrior lifted(std::span<const Matrix> target_graphs, const Matrix& projection,
                              double variance_floor = 0.1);
    Matrix sample(std::size_t rows, Rng& rng) const;
};

/// Fixed 2 x d projection drawn from N(0, 1) with the given seed.
Matrix lift_projection(std::size_t latent_dim, std::uint64_t seed);

struct AlignLossWeights {
    double adversarial = 1.0;
    double reconstruction = 0.1;
    double kl = 0.001;
};

struct AlignLoss {
    Var total;
    double adversarial = 0.0;
    double reconstruction = 0.0;
    double kl = 0.0;
};

/// lambda_adv * (-log D(z)) + lambda_rec * mean (X_s - X_hat)^2
///   + lambda_KL * KL(q || prior). Zero-weight terms are skipped.
AlignLoss alignment_loss(Var x_s, Var x_hat, const LatentCode& code, const LatentPrior& prior,
                         Var disc_out, const AlignLossWeights& w);

/// Mean-pooled node latents through two dense stages and a sigmoid.
Var latent_discriminate(Tape& t, Var z, AlignerParams& p, const ForwardContext& ctx);

/// Moment matching on off-diagonal entries: z-score, rescale to the target
/// mean and std, clamp to [0,1]. Constant inputs raise ContractError.
Matrix statistical_align(const Matrix& x_s, double target_mean, double target_std);

struct EdgeStats {
    double mean = 0.0;
    double std = 0.0;
};

/// Population mean and std of the strict upper triangle of all graphs pooled.
EdgeStats pooled_edge_stats(std::span<const Matrix> graphs);

}  // namespace sgnet
