#pragma once

// Graph convolution building blocks. Every forward pass records onto a Tape so
// gradients flow to the layer parameters and, through the adjacency and node
// features, to whatever produced them upstream.

#include <cstddef>
#include <string>
#include <vector>

#include "sgnet/autodiff.hpp"

namespace sgnet {

class Rng;

enum class Mode { Train, Eval };

struct ForwardContext {
    Mode mode = Mode::Eval;
    Rng* rng = nullptr;                // required in train mode (dropout)
    bool trainable = true;             // false: parameters enter the tape as constants
    bool update_running_stats = true;  // batch-norm running statistics (train mode only)
};

/// Binds a parameter as a differentiable leaf or a frozen constant.
Var bind(Tape& tape, Parameter& p, const ForwardContext& ctx);

/// Named references to every trainable matrix and every persistent buffer of a block.
struct ParamRefs {
    std::vector<Parameter*> params;
    std::vector<std::pair<std::string, Matrix*>> buffers;

    void append(const ParamRefs& other);
};

struct Dense {
    Parameter weight;  // d_in x d_out
    Parameter bias;    // 1 x d_out

    static Dense init(const std::string& name, std::size_t d_in, std::size_t d_out, Rng& rng);
    Var forward(Tape& t, Var x, const ForwardContext& ctx);
    void collect(ParamRefs& refs);
};

inline constexpr std::size_t kEdgeFilterHidden = 8;

// Edge-conditioned graph convolution. A small filter network maps each edge
// weight a_kl to a d_out x d_in matrix Theta(a_kl):
//   Theta(a) = reshape(tanh(a * w1 + b1) * w2 + b2)
// and node k aggregates its positive-weight neighbours:
//   z_k = W_self x_k + (1/|N(k)|) sum_{l in N(k)} Theta(a_kl) x_l + bias
struct EdgeGcnLayer {
    std::size_t d_in = 0;
    std::size_t d_out = 0;
    Parameter filter_w1;    // 1 x H
    Parameter filter_b1;    // 1 x H
    Parameter filter_w2;    // H x (d_out * d_in), row h reshaped to d_out x d_in
    Parameter filter_b2;    // 1 x (d_out * d_in)
    Parameter self_weight;  // d_out x d_in
    Parameter bias;         // 1 x d_out

    static EdgeGcnLayer init(const std::string& name, std::size_t d_in, std::size_t d_out,
                             Rng& rng);
    void collect(ParamRefs& refs);
};

Var edge_gcn_forward(Tape& t, Var x, Var adjacency, EdgeGcnLayer& layer,
                     const ForwardContext& ctx);

/// Filter output Theta(a) for a single edge weight, as a d_out x d_in matrix.
Matrix edge_filter(const EdgeGcnLayer& layer, double edge_weight);

// Spectral GCN layer: D^{-1/2} (A + I) D^{-1/2} X W + bias.
struct NodeGcnLayer {
    std::size_t d_in = 0;
    std::size_t d_out = 0;
    Parameter weight;  // d_in x d_out
    Parameter bias;    // 1 x d_out

    static NodeGcnLayer init(const std::string& name, std::size_t d_in, std::size_t d_out,
                             Rng& rng);
    void collect(ParamRefs& refs);
};

Var node_gcn_forward(Tape& t, Var x, Var adjacency, NodeGcnLayer& layer,
                     const ForwardContext& ctx);

/// Batch normalisation over the node rows followed by inverted dropout.
struct NormDropConfig {
    std::string name;
    Parameter gain;        // 1 x d
    Parameter shift;       // 1 x d
    Matrix running_mean;   // 1 x d
    Matrix running_var;    // 1 x d
    double momentum = 0.1;
    double dropout_rate = 0.2;
    double variance_floor = 1e-5;
    /// Eval mode standardises with the input's own row statistics instead of
    /// the running ones (which are still tracked).
    bool eval_input_stats = false;

    static NormDropConfig init(const std::string& name, std::size_t features);
    void collect(ParamRefs& refs);
};

Var norm_drop(Tape& t, Var x, NormDropConfig& cfg, const ForwardContext& ctx);

/// Z (n x d) -> |Z^T Z| with zero diagonal, divided by its largest entry when
/// that is positive. Always a valid d x d adjacency.
Var resolution_map(Var z);

/// -log D(real) - log(1 - D(fake)) for 1x1 discriminator outputs.
Var discriminator_loss(Var d_real, Var d_fake);

/// Mean over rows: n x d -> 1 x d.
Var mean_pool(Var x);

/// Input node features used throughout: the adjacency rows themselves.
inline Var initial_features(Var adjacency) { return adjacency; }

}  // namespace sgnet
