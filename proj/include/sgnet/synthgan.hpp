#pragma once

// The two prediction stairs (inter-modality GAN with edge-GCNs, intra-modality
// super-resolution GAN with node-GCNs), the full model and one alternating
// training step.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "sgnet/adamw.hpp"
#include "sgnet/aligner.hpp"
#include "sgnet/brain_graph.hpp"
#include "sgnet/layers.hpp"
#include "sgnet/topology.hpp"

namespace sgnet {

struct InterDims {
    std::size_t nodes_in = 35;
    std::size_t hidden1 = 64;
    std::size_t hidden2 = 128;
    std::size_t nodes_out = 160;
    std::size_t disc_hidden = 64;
};

struct IntraDims {
    std::size_t nodes_in = 160;
    std::size_t hidden1 = 200;
    std::size_t hidden2 = 268;
    std::size_t nodes_out = 268;
    std::size_t disc_hidden = 64;
};

struct ModelDims {
    AlignerDims aligner;
    InterDims inter;
    IntraDims intra;

    static ModelDims paper();
    static ModelDims desk();
    Resolutions resolutions() const {
        return {aligner.nodes, inter.nodes_out, intra.nodes_out};
    }
};

// G_inter: three edge-GCN stages with a projected skip from stage 1 into the
// input of stage 3; D_inter: two edge-GCN stages, mean pool, sigmoid.
struct InterGanParams {
    InterDims dims;
    EdgeGcnLayer g1, g2, g3;
    NormDropConfig bn1, bn2, bn3;
    Dense skip;
    EdgeGcnLayer d1, d2;

    static InterGanParams init(const InterDims& dims, Rng& rng);
    void collect_generator(ParamRefs& refs);
    void collect_discriminator(ParamRefs& refs);
};

// Same layout with node-GCN layers.
struct IntraGanParams {
    IntraDims dims;
    NodeGcnLayer g1, g2, g3;
    NormDropConfig bn1, bn2, bn3;
    Dense skip;
    NodeGcnLayer d1, d2;

    static IntraGanParams init(const IntraDims& dims, Rng& rng);
    void collect_generator(ParamRefs& refs);
    void collect_discriminator(ParamRefs& refs);
};

/// nodes_in x nodes_in graph -> nodes_out x nodes_out graph.
Var inter_generate(Tape& t, Var graph, InterGanParams& p, const ForwardContext& ctx);
Var intra_generate(Tape& t, Var graph, IntraGanParams& p, const ForwardContext& ctx);

/// Realness score in (0,1). The graph must have nodes_out nodes.
Var discriminate(Tape& t, Var graph, InterGanParams& p, const ForwardContext& ctx);
Var discriminate(Tape& t, Var graph, IntraGanParams& p, const ForwardContext& ctx);

enum class Variant { Full, NoAlign, StatAlign, VgaeAlign, ArgaAlign, NoPcc, NoTopology };

inline constexpr std::array<Variant, 7> kAllVariants = {
    Variant::Full,      Variant::NoAlign, Variant::StatAlign, Variant::VgaeAlign,
    Variant::ArgaAlign, Variant::NoPcc,   Variant::NoTopology};

std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

enum class PriorKind { Lifted, StandardNormal };

struct GanConfig {
    Variant variant = Variant::Full;
    AlignLossWeights align_weights;
    GtpLossWeights gtp_weights;
    double lr_g = 0.025;
    double lr_d = 0.01;
    std::size_t ec_iterations = 50;
    bool teacher_forcing = false;
    PriorKind prior = PriorKind::Lifted;
    double prior_variance_floor = 0.1;
    std::uint64_t projection_seed = 0;
    /// Pooled training-fold target edge statistics, used by StatAlign.
    EdgeStats stat_target{0.5, 0.1};
    /// Only the aligner and D_align are updated (warm start).
    bool aligner_only = false;

    /// Loss weights after the variant's switches are applied.
    AlignLossWeights effective_align_weights() const;
    GtpLossWeights effective_gtp_weights() const;
    bool uses_aligner() const;
    bool uses_latent_discriminator() const;
};

struct SgNetParams {
    ModelDims dims;
    AlignerParams aligner;
    InterGanParams inter;
    IntraGanParams intra;
    Matrix projection;  // lifts target edge statistics into the latent space

    static SgNetParams init(const ModelDims& dims, std::uint64_t seed);
    ParamRefs generator_refs();
    ParamRefs discriminator_refs();
    /// Every parameter and buffer, generators first.
    ParamRefs all_refs();
};

struct Optimizers {
    AdamW generator;
    AdamW discriminator;
    // Aligner warm start updates a different parameter list.
    AdamW warmup_generator;
    AdamW warmup_discriminator;
};

struct Prediction {
    Matrix aligned;
    Matrix target_lr;
    Matrix target_hr;
};

/// Eval-mode stairway for one source graph.
Prediction predict(SgNetParams& model, const Matrix& source, const GanConfig& cfg);

struct StepLog {
    double align_adv = 0, align_rec = 0, align_kl = 0, align_total = 0;
    double inter_adv = 0, inter_l1 = 0, inter_pcc = 0, inter_top = 0, inter_total = 0;
    double intra_adv = 0, intra_l1 = 0, intra_pcc = 0, intra_top = 0, intra_total = 0;
    double gtp_total = 0;  // inter_total + intra_total
    double generator_total = 0;
    double d_align = 0, d_inter = 0, d_intra = 0;

    static constexpr std::size_t kFields = 19;
    static const std::array<const char*, kFields>& names();
    std::array<double, kFields> values() const;
};

/// One alternating update on a mini-batch: the discriminators learn on real
/// versus generated graphs, then the aligner and both generators learn on
/// L_align + GT-P(inter) + GT-P(intra) against the updated, frozen
/// discriminators. Values in the log are batch means.
StepLog gan_step(std::span<const SubjectTriple* const> batch, SgNetParams& model, Optimizers& opt,
                 const GanConfig& cfg, Rng& rng);

}  // namespace sgnet
