#pragma once

#include <cstddef>
#include <cstdint>

#include "sgnet/brain_graph.hpp"

namespace sgnet {

// Knobs of the synthetic cohort generator. Each subject draws a latent vector;
// every graph is a fixed smooth function of that latent (node embeddings
// shifted linearly by the latent, followed by a Gram product), so a
// source-to-target mapping exists by construction. The source domain is
// additionally skewed, giving it a non-Gaussian edge distribution that a
// moment-matching alignment cannot fully undo.
struct SyntheticOptions {
    Resolutions resolutions = Resolutions::desk();
    std::size_t latent_dim = 4;
    std::size_t embedding_rank = 6;
    double latent_scale = 0.6;  // std of the latent-to-embedding weights
    double source_mean = 0.35;
    double source_std = 0.10;
    double source_skew = 0.3;   // 0 keeps the source Gaussian-like
    double edge_noise = 0.02;   // i.i.d. per-edge noise std
};

/// Deterministic in (n_subjects, seed, shift, options). Targets have edge-weight
/// mean source_mean + shift.mean and std source_std + shift.std before clamping.
Dataset generate_synthetic_dataset(std::size_t n_subjects, std::uint64_t seed, DomainShift shift,
                                   const SyntheticOptions& options = {});

}  // namespace sgnet
