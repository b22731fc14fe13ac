#include "sgnet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sgnet/error.hpp"
#include "sgnet/rng.hpp"

namespace sgnet {
namespace {

constexpr std::size_t kReferenceDraws = 256;

// Latent -> raw symmetric edge scores for one graph family: node embeddings
// h_k = E_k + u M_k, scores h_k . h_l / rank.
class GraphMap {
public:
    GraphMap(std::size_t nodes, std::size_t latent_dim, std::size_t rank, double latent_scale,
             Rng& rng)
        : nodes_(nodes),
          rank_(rank),
          latent_dim_(latent_dim),
          embed_(Matrix::random_normal(nodes, rank, rng)),
          mix_(Matrix::random_normal(nodes * latent_dim, rank, rng, latent_scale)) {}

    Matrix scores(const Matrix& latent) const {
        Matrix h = embed_;
        for (std::size_t k = 0; k < nodes_; ++k)
            for (std::size_t j = 0; j < latent_dim_; ++j)
                for (std::size_t r = 0; r < rank_; ++r) h(k, r) += latent[j] * mix_(k * latent_dim_ + j, r);
        Matrix s(nodes_, nodes_);
        for (std::size_t k = 0; k < nodes_; ++k)
            for (std::size_t l = k + 1; l < nodes_; ++l) {
                double d = 0.0;
                for (std::size_t r = 0; r < rank_; ++r) d += h(k, r) * h(l, r);
                s(k, l) = s(l, k) = d / static_cast<double>(rank_);
            }
        return s;
    }

    std::size_t nodes() const { return nodes_; }

private:
    std::size_t nodes_;
    std::size_t rank_;
    std::size_t latent_dim_;
    Matrix embed_;
    Matrix mix_;
};

double skew_transform(double z, double skew) {
    return skew == 0.0 ? z : (std::exp(skew * z) - 1.0) / skew;
}

struct Moments {
    double mean = 0.0;
    double std = 1.0;
};

// Population moments of the off-diagonal scores (after the optional skew),
// estimated once from a fixed reference set of latents.
Moments reference_moments(const GraphMap& map, const std::vector<Matrix>& latents,
                          const Moments& pre, double skew) {
    double s = 0.0, s2 = 0.0;
    std::size_t count = 0;
    for (const Matrix& u : latents) {
        const Matrix sc = map.scores(u);
        for (std::size_t k = 0; k < map.nodes(); ++k)
            for (std::size_t l = k + 1; l < map.nodes(); ++l) {
                const double z = skew_transform((sc(k, l) - pre.mean) / pre.std, skew);
                s += z;
                s2 += z * z;
                ++count;
            }
    }
    const double mean = s / static_cast<double>(count);
    const double var = s2 / static_cast<double>(count) - mean * mean;
    return {mean, std::sqrt(std::max(var, 1e-300))};
}

Matrix realize(const GraphMap& map, const Matrix& latent, const Moments& raw, const Moments& post,
               double skew, double mean, double stddev, double noise, Rng& rng) {
    const Matrix sc = map.scores(latent);
    const std::size_t n = map.nodes();
    Matrix a(n, n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) {
            const double z = (skew_transform((sc(k, l) - raw.mean) / raw.std, skew) - post.mean) /
                             post.std;
            const double w = std::clamp(mean + stddev * z + noise * rng.normal(), 0.0, 1.0);
            a(k, l) = a(l, k) = w;
        }
    return a;
}

}  // namespace

Dataset generate_synthetic_dataset(std::size_t n_subjects, std::uint64_t seed, DomainShift shift,
                                   const SyntheticOptions& options) {
    if (n_subjects < 3)
        throw ContractError("generate_synthetic_dataset: need at least 3 subjects for a 3-fold split");
    if (options.latent_dim == 0 || options.embedding_rank == 0)
        throw ContractError("generate_synthetic_dataset: latent_dim and embedding_rank must be > 0");
    if (options.source_std + shift.std <= 0.0 || options.source_std <= 0.0)
        throw ContractError("generate_synthetic_dataset: edge-weight std must stay positive");

    const Resolutions& res = options.resolutions;
    // The maps depend on the seed only, so cohorts of different sizes share them.
    Rng map_rng(seed * 0x9E3779B97F4A7C15ULL + 0x5DEECE66DULL);
    const GraphMap source_map(res.source, options.latent_dim, options.embedding_rank,
                                options.latent_scale, map_rng);
    const GraphMap lr_map(res.target_lr, options.latent_dim, options.embedding_rank,
                                options.latent_scale, map_rng);
    const GraphMap hr_map(res.target_hr, options.latent_dim, options.embedding_rank,
                                options.latent_scale, map_rng);

    std::vector<Matrix> reference;
    for (std::size_t i = 0; i < kReferenceDraws; ++i)
        reference.push_back(Matrix::random_normal(1, options.latent_dim, map_rng));
    auto calibrate = [&](const GraphMap& map, double skew) {
        const Moments raw = reference_moments(map, reference, {0.0, 1.0}, 0.0);
        const Moments post = reference_moments(map, reference, raw, skew);
        return std::pair{raw, post};
    };
    const auto [src_raw, src_post] = calibrate(source_map, options.source_skew);
    const auto [lr_raw, lr_post] = calibrate(lr_map, 0.0);
    const auto [hr_raw, hr_post] = calibrate(hr_map, 0.0);

    const double target_mean = options.source_mean + shift.mean;
    const double target_std = options.source_std + shift.std;

    Rng rng(seed);
    std::vector<SubjectTriple> subjects;
    subjects.reserve(n_subjects);
    for (std::size_t i = 0; i < n_subjects; ++i) {
        const Matrix latent = Matrix::random_normal(1, options.latent_dim, rng);
        char id[32];
        std::snprintf(id, sizeof id, "subject_%03zu", i);
        Matrix src = realize(source_map, latent, src_raw, src_post, options.source_skew,
                             options.source_mean, options.source_std, options.edge_noise, rng);
        Matrix lr = realize(lr_map, latent, lr_raw, lr_post, 0.0, target_mean, target_std,
                            options.edge_noise, rng);
        Matrix hr = realize(hr_map, latent, hr_raw, hr_post, 0.0, target_mean, target_std,
                            options.edge_noise, rng);
        subjects.push_back({id, BrainGraph(std::move(src), Modality::Morphological),
                            BrainGraph(std::move(lr), Modality::Functional),
                            BrainGraph(std::move(hr), Modality::Functional)});
    }
    return Dataset(std::move(subjects), seed, shift, Provenance::Synthetic);
}

}  // namespace sgnet
