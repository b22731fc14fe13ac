#include "sgnet/layers.hpp"

#include <cmath>

#include "sgnet/error.hpp"
#include "sgnet/rng.hpp"

namespace sgnet {
namespace {

Matrix glorot(std::size_t fan_in, std::size_t fan_out, std::size_t rows, std::size_t cols,
              Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    return Matrix::random_uniform(rows, cols, rng, -limit, limit);
}

void require_square(const char* op, const Matrix& a, std::size_t rows_x) {
    if (a.rows() != a.cols())
        throw DimensionError(std::string(op) + ": adjacency must be square, got " + a.shape_str());
    if (rows_x != a.rows())
        throw DimensionError(std::string(op) + ": feature rows " + std::to_string(rows_x) +
                             " do not match adjacency " + a.shape_str());
}

}  // namespace

Var bind(Tape& tape, Parameter& p, const ForwardContext& ctx) {
    return ctx.trainable ? tape.param(p) : tape.frozen(p);
}

void ParamRefs::append(const ParamRefs& other) {
    params.insert(params.end(), other.params.begin(), other.params.end());
    buffers.insert(buffers.end(), other.buffers.begin(), other.buffers.end());
}

Dense Dense::init(const std::string& name, std::size_t d_in, std::size_t d_out, Rng& rng) {
    return {Parameter(name + ".weight", glorot(d_in, d_out, d_in, d_out, rng)),
            Parameter(name + ".bias", Matrix(1, d_out))};
}

Var Dense::forward(Tape& t, Var x, const ForwardContext& ctx) {
    if (x.cols() != weight.value.rows())
        throw DimensionError("dense '" + weight.name + "': input " + x.value().shape_str() +
                             " vs weight " + weight.value.shape_str());
    return matmul(x, bind(t, weight, ctx)) + broadcast_rows(bind(t, bias, ctx), x.rows());
}

void Dense::collect(ParamRefs& refs) {
    refs.params.push_back(&weight);
    refs.params.push_back(&bias);
}

EdgeGcnLayer EdgeGcnLayer::init(const std::string& name, std::size_t d_in, std::size_t d_out,
                                Rng& rng) {
    if (d_in == 0 || d_out == 0) throw ContractError("EdgeGcnLayer: zero feature dimension");
    const std::size_t h = kEdgeFilterHidden;
    EdgeGcnLayer l;
    l.d_in = d_in;
    l.d_out = d_out;
    l.filter_w1 = Parameter(name + ".filter_w1", Matrix::random_uniform(1, h, rng, -2.0, 2.0));
    l.filter_b1 = Parameter(name + ".filter_b1", Matrix::random_uniform(1, h, rng, -1.0, 1.0));
    const double s = 1.0 / std::sqrt(static_cast<double>(h * d_in));
    l.filter_w2 = Parameter(name + ".filter_w2", Matrix::random_normal(h, d_out * d_in, rng, s));
    l.filter_b2 = Parameter(name + ".filter_b2",
                            Matrix::random_normal(1, d_out * d_in, rng,
                                                  0.5 / std::sqrt(static_cast<double>(d_in))));
    l.self_weight = Parameter(name + ".self_weight", glorot(d_in, d_out, d_out, d_in, rng));
    l.bias = Parameter(name + ".bias", Matrix(1, d_out));
    return l;
}

void EdgeGcnLayer::collect(ParamRefs& refs) {
    for (Parameter* p : {&filter_w1, &filter_b1, &filter_w2, &filter_b2, &self_weight, &bias})
        refs.params.push_back(p);
}

Matrix edge_filter(const EdgeGcnLayer& layer, double edge_weight) {
    const std::size_t h = kEdgeFilterHidden;
    Matrix theta(layer.d_out, layer.d_in);
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = layer.filter_b2.value[i];
    for (std::size_t k = 0; k < h; ++k) {
        const double act =
            std::tanh(edge_weight * layer.filter_w1.value[k] + layer.filter_b1.value[k]);
        for (std::size_t i = 0; i < theta.size(); ++i)
            theta[i] += act * layer.filter_w2.value(k, i);
    }
    return theta;
}

// The per-edge filters are never materialised. Writing Theta(a_kl) as
// sum_h H_kl[h] R_h + R_b (R_h = row h of w2 reshaped, R_b = b2 reshaped) gives
//   message = sum_h ((N o H_h) X) R_h^T + (N X) R_b^T
// with N the row-normalised neighbour mask, which costs H+1 dense products.
Var edge_gcn_forward(Tape& t, Var x, Var adjacency, EdgeGcnLayer& layer,
                     const ForwardContext& ctx) {
    const Matrix& a = adjacency.value();
    require_square("edge_gcn_forward", a, x.rows());
    if (x.cols() != layer.d_in)
        throw DimensionError("edge_gcn_forward: features have " + std::to_string(x.cols()) +
                             " columns, layer expects " + std::to_string(layer.d_in));
    const std::size_t n = a.rows();
    const std::size_t h = kEdgeFilterHidden;

    Matrix norm(n, n);
    bool any_edge = false;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t deg = 0;
        for (std::size_t l = 0; l < n; ++l) deg += a(k, l) > 0.0 ? 1 : 0;
        if (deg == 0) continue;
        any_edge = true;
        const double inv = 1.0 / static_cast<double>(deg);
        for (std::size_t l = 0; l < n; ++l)
            if (a(k, l) > 0.0) norm(k, l) = inv;
    }

    Var self_w = bind(t, layer.self_weight, ctx);
    Var out = matmul(x, transpose(self_w)) + broadcast_rows(bind(t, layer.bias, ctx), n);
    if (!any_edge) return out;

    const Var mask = t.constant(std::move(norm));
    const Var w1 = bind(t, layer.filter_w1, ctx);
    const Var b1 = bind(t, layer.filter_b1, ctx);
    const Var w2 = bind(t, layer.filter_w2, ctx);
    const Var b2 = bind(t, layer.filter_b2, ctx);

    const Var edge_col = reshape(adjacency, n * n, 1);
    const Var hidden = tanh(matmul(edge_col, w1) + broadcast_rows(b1, n * n));  // n^2 x H
    for (std::size_t k = 0; k < h; ++k) {
        const Var hk = hadamard(reshape(slice_cols(hidden, k, 1), n, n), mask);
        const Var rk = reshape(slice_rows(w2, k, 1), layer.d_out, layer.d_in);
        out = out + matmul(matmul(hk, x), transpose(rk));
    }
    const Var rb = reshape(b2, layer.d_out, layer.d_in);
    return out + matmul(matmul(mask, x), transpose(rb));
}

NodeGcnLayer NodeGcnLayer::init(const std::string& name, std::size_t d_in, std::size_t d_out,
                                Rng& rng) {
    if (d_in == 0 || d_out == 0) throw ContractError("NodeGcnLayer: zero feature dimension");
    NodeGcnLayer l;
    l.d_in = d_in;
    l.d_out = d_out;
    l.weight = Parameter(name + ".weight", glorot(d_in, d_out, d_in, d_out, rng));
    l.bias = Parameter(name + ".bias", Matrix(1, d_out));
    return l;
}

void NodeGcnLayer::collect(ParamRefs& refs) {
    refs.params.push_back(&weight);
    refs.params.push_back(&bias);
}

Var node_gcn_forward(Tape& t, Var x, Var adjacency, NodeGcnLayer& layer,
                     const ForwardContext& ctx) {
    const std::size_t n = adjacency.rows();
    require_square("node_gcn_forward", adjacency.value(), x.rows());
    if (x.cols() != layer.d_in)
        throw DimensionError("node_gcn_forward: features have " + std::to_string(x.cols()) +
                             " columns, layer expects " + std::to_string(layer.d_in));
    const Var a_tilde = adjacency + t.constant(Matrix::identity(n));
    const Var degree = matmul(a_tilde, t.constant(Matrix::ones(n, 1)));  // n x 1, >= 1
    const Var inv_sqrt = divide(t.constant(Matrix::ones(n, 1)), sqrt(degree));
    const Var scaling = matmul(inv_sqrt, transpose(inv_sqrt));
    const Var a_hat = hadamard(a_tilde, scaling);
    return matmul(matmul(a_hat, x), bind(t, layer.weight, ctx)) +
           broadcast_rows(bind(t, layer.bias, ctx), n);
}

NormDropConfig NormDropConfig::init(const std::string& name, std::size_t features) {
    NormDropConfig c;
    c.name = name;
    c.gain = Parameter(name + ".gain", Matrix::ones(1, features));
    c.shift = Parameter(name + ".shift", Matrix(1, features));
    c.running_mean = Matrix(1, features);
    c.running_var = Matrix::ones(1, features);
    return c;
}

void NormDropConfig::collect(ParamRefs& refs) {
    refs.params.push_back(&gain);
    refs.params.push_back(&shift);
    refs.buffers.emplace_back(name + ".running_mean", &running_mean);
    refs.buffers.emplace_back(name + ".running_var", &running_var);
}

Var norm_drop(Tape& t, Var x, NormDropConfig& cfg, const ForwardContext& ctx) {
    const std::size_t n = x.rows(), d = x.cols();
    if (d != cfg.gain.value.cols())
        throw DimensionError("norm_drop '" + cfg.name + "': input " + x.value().shape_str() +
                             " vs " + std::to_string(cfg.gain.value.cols()) + " features");
    Var normalized;
    const bool train = ctx.mode == Mode::Train;
    if (train || cfg.eval_input_stats) {
        if (n < 2) throw ContractError("norm_drop: batch statistics need at least 2 rows");
        const Var avg_row = t.constant(Matrix(1, n, 1.0 / static_cast<double>(n)));
        const Var mu = matmul(avg_row, x);
        const Var centered = x - broadcast_rows(mu, n);
        const Var var = matmul(avg_row, hadamard(centered, centered));
        const Var std = sqrt(var + t.constant(Matrix(1, d, cfg.variance_floor)));
        normalized = divide(centered, broadcast_rows(std, n));
        if (train && ctx.update_running_stats) {
            const double m = cfg.momentum;
            const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
            for (std::size_t j = 0; j < d; ++j) {
                cfg.running_mean[j] = (1.0 - m) * cfg.running_mean[j] + m * mu.value()[j];
                cfg.running_var[j] = (1.0 - m) * cfg.running_var[j] + m * var.value()[j] * unbias;
            }
        }
    } else {
        Matrix inv(1, d);
        for (std::size_t j = 0; j < d; ++j)
            inv[j] = 1.0 / std::sqrt(std::max(cfg.running_var[j], 0.0) + cfg.variance_floor);
        Matrix mean_rows(n, d), inv_rows(n, d);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < d; ++j) {
                mean_rows(r, j) = cfg.running_mean[j];
                inv_rows(r, j) = inv[j];
            }
        normalized = hadamard(x - t.constant(std::move(mean_rows)), t.constant(std::move(inv_rows)));
    }
    Var y = hadamard(normalized, broadcast_rows(bind(t, cfg.gain, ctx), n)) +
            broadcast_rows(bind(t, cfg.shift, ctx), n);
    if (ctx.mode == Mode::Train && cfg.dropout_rate > 0.0) {
        if (!ctx.rng) throw ContractError("norm_drop: train mode needs an RNG for dropout");
        y = dropout(y, cfg.dropout_rate, *ctx.rng);
    }
    return y;
}

Var resolution_map(Var z) {
    Tape& t = z.tape();
    const std::size_t d = z.cols();
    Matrix off = Matrix::ones(d, d);
    for (std::size_t i = 0; i < d; ++i) off(i, i) = 0.0;
    const Var gram = abs(hadamard(matmul(transpose(z), z), t.constant(std::move(off))));
    const Var peak = max_all(gram);
    // Off-diagonal mass at rounding level (orthogonal columns) is not rescaled.
    const Matrix& zz = z.value();
    double diag = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < zz.rows(); ++i) s += zz(i, j) * zz(i, j);
        diag = std::max(diag, s);
    }
    if (peak.value()[0] <= 1e-12 * diag || peak.value()[0] <= 0.0) return gram;
    return divide(gram, broadcast_rows(broadcast_cols(peak, d), d));
}

Var discriminator_loss(Var d_real, Var d_fake) {
    Tape& t = d_real.tape();
    const Var one = t.constant(Matrix::scalar(1.0));
    return scale(log(d_real) + log(one - d_fake), -1.0);
}

Var mean_pool(Var x) {
    Tape& t = x.tape();
    return scale(matmul(t.constant(Matrix::ones(1, x.rows())), x), 1.0 / static_cast<double>(x.rows()));
}

}  // namespace sgnet
