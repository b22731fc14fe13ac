#include "sgnet/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "sgnet/error.hpp"
#include "sgnet/kernels.hpp"
#include "sgnet/rng.hpp"

namespace sgnet {

Parameter::Parameter(std::string name_, Matrix value_)
    : name(std::move(name_)), value(std::move(value_)), grad(value.rows(), value.cols()) {}

void Parameter::zero_grad() {
    if (!grad.same_shape(value)) grad = Matrix(value.rows(), value.cols());
    else grad.fill(0.0);
}

std::string_view prim_name(Prim kind) {
    switch (kind) {
        case Prim::Constant: return "constant";
        case Prim::Param: return "param";
        case Prim::MatMul: return "matmul";
        case Prim::Transpose: return "transpose";
        case Prim::Add: return "add";
        case Prim::Subtract: return "subtract";
        case Prim::Hadamard: return "hadamard";
        case Prim::Scale: return "scale";
        case Prim::LeakyRelu: return "leaky_relu";
        case Prim::Sigmoid: return "sigmoid";
        case Prim::Tanh: return "tanh";
        case Prim::Exp: return "exp";
        case Prim::Log: return "log";
        case Prim::Sum: return "sum";
        case Prim::Mean: return "mean";
        case Prim::Abs: return "abs";
        case Prim::ConcatRows: return "concat_rows";
        case Prim::Reshape: return "reshape";
        case Prim::ConcatCols: return "concat_cols";
        case Prim::SliceRows: return "slice_rows";
        case Prim::SliceCols: return "slice_cols";
        case Prim::Divide: return "divide";
        case Prim::Sqrt: return "sqrt";
        case Prim::Clamp: return "clamp";
        case Prim::MaxAll: return "max_all";
        case Prim::ScaleBy: return "scale_by";
        case Prim::BroadcastRows: return "broadcast_rows";
        case Prim::BroadcastCols: return "broadcast_cols";
        case Prim::Dropout: return "dropout";
    }
    return "unknown";
}

const Matrix& Var::value() const {
    if (!tape_) throw ContractError("Var::value: unbound variable");
    return tape_->value(*this);
}

bool Var::requires_grad() const { return tape_ && tape_->requires_grad(*this); }

namespace {

[[noreturn]] void shape_error(Prim kind, const Matrix& a, const Matrix& b) {
    throw DimensionError(std::string(prim_name(kind)) + ": incompatible shapes " + a.shape_str() +
                         " and " + b.shape_str());
}

[[noreturn]] void shape_error(Prim kind, const Matrix& a, const std::string& why) {
    throw DimensionError(std::string(prim_name(kind)) + ": shape " + a.shape_str() + " " + why);
}

std::size_t arity(Prim kind) {
    switch (kind) {
        case Prim::Constant:
        case Prim::Param: return 0;
        case Prim::MatMul:
        case Prim::Add:
        case Prim::Subtract:
        case Prim::Hadamard:
        case Prim::Divide:
        case Prim::ScaleBy: return 2;
        case Prim::ConcatRows:
        case Prim::ConcatCols: return SIZE_MAX;
        default: return 1;
    }
}

template <class F>
Matrix map_unary(const Matrix& a, F f) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

Matrix forward(Prim kind, const std::vector<const Matrix*>& in, const PrimArgs& args) {
    const auto& k = kernels::active();
    switch (kind) {
        case Prim::MatMul: {
            const Matrix& a = *in[0];
            const Matrix& b = *in[1];
            if (a.cols() != b.rows()) shape_error(kind, a, b);
            Matrix c(a.rows(), b.cols());
            k.gemm_nn(a.rows(), b.cols(), a.cols(), a.data(), b.data(), c.data());
            return c;
        }
        case Prim::Transpose: return in[0]->transposed();
        case Prim::Add:
        case Prim::Subtract:
        case Prim::Hadamard:
        case Prim::Divide: {
            const Matrix& a = *in[0];
            const Matrix& b = *in[1];
            if (!a.same_shape(b)) shape_error(kind, a, b);
            Matrix c(a.rows(), a.cols());
            if (kind == Prim::Add) k.add(a.size(), a.data(), b.data(), c.data());
            else if (kind == Prim::Subtract) k.sub(a.size(), a.data(), b.data(), c.data());
            else if (kind == Prim::Hadamard) k.mul(a.size(), a.data(), b.data(), c.data());
            else
                for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] / b[i];
            return c;
        }
        case Prim::Scale: {
            Matrix c(in[0]->rows(), in[0]->cols());
            k.scale(c.size(), args.alpha, in[0]->data(), c.data());
            return c;
        }
        case Prim::LeakyRelu: {
            const double slope = args.alpha;
            return map_unary(*in[0], [slope](double x) { return x > 0.0 ? x : slope * x; });
        }
        case Prim::Sigmoid:
            return map_unary(*in[0], [](double x) {
                if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                const double e = std::exp(x);
                return e / (1.0 + e);
            });
        case Prim::Tanh: return map_unary(*in[0], [](double x) { return std::tanh(x); });
        case Prim::Exp: return map_unary(*in[0], [](double x) { return std::exp(x); });
        case Prim::Log: return map_unary(*in[0], [](double x) { return std::log(x); });
        case Prim::Sum: return Matrix::scalar(k.sum(in[0]->size(), in[0]->data()));
        case Prim::Mean:
            return Matrix::scalar(k.sum(in[0]->size(), in[0]->data()) /
                                  static_cast<double>(in[0]->size()));
        case Prim::Abs: return map_unary(*in[0], [](double x) { return std::abs(x); });
        case Prim::Sqrt: return map_unary(*in[0], [](double x) { return std::sqrt(x); });
        case Prim::Clamp: {
            const double lo = args.alpha, hi = args.beta;
            if (!(lo <= hi)) throw ContractError("clamp: lower bound exceeds upper bound");
            return map_unary(*in[0], [lo, hi](double x) { return std::clamp(x, lo, hi); });
        }
        case Prim::ConcatRows: {
            const std::size_t cols = in[0]->cols();
            std::size_t rows = 0;
            for (const Matrix* m : in) {
                if (m->cols() != cols) shape_error(kind, *in[0], *m);
                rows += m->rows();
            }
            Matrix c(rows, cols);
            std::size_t off = 0;
            for (const Matrix* m : in) {
                std::copy(m->data(), m->data() + m->size(), c.data() + off);
                off += m->size();
            }
            return c;
        }
        case Prim::ConcatCols: {
            const std::size_t rows = in[0]->rows();
            std::size_t cols = 0;
            for (const Matrix* m : in) {
                if (m->rows() != rows) shape_error(kind, *in[0], *m);
                cols += m->cols();
            }
            Matrix c(rows, cols);
            std::size_t c0 = 0;
            for (const Matrix* m : in) {
                for (std::size_t r = 0; r < rows; ++r)
                    std::copy(m->data() + r * m->cols(), m->data() + (r + 1) * m->cols(),
                              c.data() + r * cols + c0);
                c0 += m->cols();
            }
            return c;
        }
        case Prim::Reshape: {
            const Matrix& a = *in[0];
            if (args.m * args.n != a.size() || args.m == 0)
                shape_error(kind, a,
                            "cannot be reshaped to " + std::to_string(args.m) + "x" +
                                std::to_string(args.n));
            return Matrix(args.m, args.n, std::vector<double>(a.values().begin(), a.values().end()));
        }
        case Prim::SliceRows: {
            const Matrix& a = *in[0];
            if (args.n == 0 || args.m + args.n > a.rows())
                shape_error(kind, a, "has no rows [" + std::to_string(args.m) + ", " +
                                         std::to_string(args.m + args.n) + ")");
            const double* src = a.data() + args.m * a.cols();
            return Matrix(args.n, a.cols(), std::vector<double>(src, src + args.n * a.cols()));
        }
        case Prim::SliceCols: {
            const Matrix& a = *in[0];
            if (args.n == 0 || args.m + args.n > a.cols())
                shape_error(kind, a, "has no columns [" + std::to_string(args.m) + ", " +
                                         std::to_string(args.m + args.n) + ")");
            Matrix c(a.rows(), args.n);
            for (std::size_t r = 0; r < a.rows(); ++r)
                for (std::size_t j = 0; j < args.n; ++j) c(r, j) = a(r, args.m + j);
            return c;
        }
        case Prim::MaxAll: {
            const auto v = in[0]->values();
            return Matrix::scalar(*std::max_element(v.begin(), v.end()));
        }
        case Prim::ScaleBy: {
            const Matrix& a = *in[0];
            const Matrix& s = *in[1];
            if (s.rows() != 1 || s.cols() != 1) shape_error(kind, a, s);
            Matrix c(a.rows(), a.cols());
            k.scale(a.size(), s[0], a.data(), c.data());
            return c;
        }
        case Prim::BroadcastRows: {
            const Matrix& a = *in[0];
            if (a.rows() != 1 || args.m == 0) shape_error(kind, a, "is not a 1 x d row");
            Matrix c(args.m, a.cols());
            for (std::size_t r = 0; r < args.m; ++r)
                std::copy(a.data(), a.data() + a.cols(), c.data() + r * a.cols());
            return c;
        }
        case Prim::BroadcastCols: {
            const Matrix& a = *in[0];
            if (a.cols() != 1 || args.m == 0) shape_error(kind, a, "is not an n x 1 column");
            Matrix c(a.rows(), args.m);
            for (std::size_t r = 0; r < a.rows(); ++r)
                std::fill(c.data() + r * args.m, c.data() + (r + 1) * args.m, a[r]);
            return c;
        }
        case Prim::Dropout: {
            const Matrix& a = *in[0];
            if (!a.same_shape(args.mask)) shape_error(kind, a, args.mask);
            Matrix c(a.rows(), a.cols());
            k.mul(a.size(), a.data(), args.mask.data(), c.data());
            return c;
        }
        case Prim::Constant:
        case Prim::Param: break;
    }
    throw ContractError("Tape::apply: primitive " + std::string(prim_name(kind)) +
                        " cannot be applied");
}

}  // namespace

Var Tape::push(Node node) {
    if (nodes_.size() >= UINT32_MAX) throw ContractError("Tape: node limit reached");
    nodes_.push_back(std::move(node));
    return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::constant(Matrix value) {
    if (value.empty()) throw DimensionError("constant: empty matrix");
    if (!value.all_finite()) throw NumericError("constant: non-finite input entries");
    Node n{Prim::Constant, std::move(value), {}, {}, {}, nullptr, false};
    return push(std::move(n));
}

Var Tape::param(Parameter& p) {
    if (p.value.empty()) throw DimensionError("param '" + p.name + "': empty matrix");
    if (!p.value.all_finite())
        throw NumericError("param '" + p.name + "': non-finite entries");
    Node n{Prim::Param, p.value, {}, {}, {}, &p, true};
    return push(std::move(n));
}

Var Tape::apply(Prim kind, std::span<const Var> inputs, const PrimArgs& args) {
    const std::size_t expected = arity(kind);
    if (expected == 0) throw ContractError("Tape::apply: leaves are created with constant/param");
    if (inputs.empty() || (expected != SIZE_MAX && inputs.size() != expected))
        throw ContractError("Tape::apply: " + std::string(prim_name(kind)) + " expects " +
                            std::to_string(expected) + " inputs, got " +
                            std::to_string(inputs.size()));
    std::vector<const Matrix*> in;
    std::vector<std::uint32_t> ids;
    in.reserve(inputs.size());
    ids.reserve(inputs.size());
    bool needs_grad = false;
    for (const Var& v : inputs) {
        if (v.tape_ != this)
            throw ContractError("Tape::apply: " + std::string(prim_name(kind)) +
                                " input belongs to a different tape");
        in.push_back(&nodes_[v.id_].value);
        ids.push_back(v.id_);
        needs_grad = needs_grad || nodes_[v.id_].requires_grad;
    }
    Matrix out = forward(kind, in, args);
    if (!out.all_finite()) {
        std::string shapes;
        for (const Matrix* m : in) shapes += (shapes.empty() ? "" : ", ") + m->shape_str();
        throw NumericError(std::string(prim_name(kind)) + ": non-finite output (inputs " +
                           shapes + ")");
    }
    Node n{kind, std::move(out), {}, std::move(ids), {}, nullptr, needs_grad};
    if (kind == Prim::Dropout || kind == Prim::Scale || kind == Prim::LeakyRelu ||
        kind == Prim::Clamp || kind == Prim::Reshape || kind == Prim::SliceRows ||
        kind == Prim::SliceCols || kind == Prim::BroadcastRows || kind == Prim::BroadcastCols)
        n.args = args;
    return push(std::move(n));
}

Matrix& Tape::grad_buffer(std::uint32_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
    return n.grad;
}

void Tape::propagate(const Node& node) {
    const Matrix& g = node.grad;
    const auto& k = kernels::active();
    auto wants = [&](std::size_t i) { return nodes_[node.inputs[i]].requires_grad; };
    auto val = [&](std::size_t i) -> const Matrix& { return nodes_[node.inputs[i]].value; };
    auto gin = [&](std::size_t i) -> Matrix& { return grad_buffer(node.inputs[i]); };
    auto unary = [&](auto dfdx) {
        if (!wants(0)) return;
        const Matrix& x = val(0);
        Matrix& gx = gin(0);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * dfdx(x[i], node.value[i]);
    };

    switch (node.kind) {
        case Prim::Constant:
        case Prim::Param: return;
        case Prim::MatMul: {
            const Matrix& a = val(0);
            const Matrix& b = val(1);
            if (wants(0)) k.gemm_nt(a.rows(), a.cols(), b.cols(), g.data(), b.data(), gin(0).data());
            if (wants(1)) k.gemm_tn(b.rows(), b.cols(), a.rows(), a.data(), g.data(), gin(1).data());
            return;
        }
        case Prim::Transpose: {
            if (!wants(0)) return;
            Matrix& gx = gin(0);
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) gx(c, r) += g(r, c);
            return;
        }
        case Prim::Add:
            if (wants(0)) k.axpy(g.size(), 1.0, g.data(), gin(0).data());
            if (wants(1)) k.axpy(g.size(), 1.0, g.data(), gin(1).data());
            return;
        case Prim::Subtract:
            if (wants(0)) k.axpy(g.size(), 1.0, g.data(), gin(0).data());
            if (wants(1)) k.axpy(g.size(), -1.0, g.data(), gin(1).data());
            return;
        case Prim::Hadamard:
            if (wants(0)) k.fma_acc(g.size(), g.data(), val(1).data(), gin(0).data());
            if (wants(1)) k.fma_acc(g.size(), g.data(), val(0).data(), gin(1).data());
            return;
        case Prim::Divide: {
            const Matrix& a = val(0);
            const Matrix& b = val(1);
            if (wants(0)) {
                Matrix& ga = gin(0);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / b[i];
            }
            if (wants(1)) {
                Matrix& gb = gin(1);
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i] * a[i] / (b[i] * b[i]);
            }
            return;
        }
        case Prim::Scale:
            if (wants(0)) k.axpy(g.size(), node.args.alpha, g.data(), gin(0).data());
            return;
        case Prim::LeakyRelu: {
            const double slope = node.args.alpha;
            unary([slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
            return;
        }
        case Prim::Sigmoid: unary([](double, double y) { return y * (1.0 - y); }); return;
        case Prim::Tanh: unary([](double, double y) { return 1.0 - y * y; }); return;
        case Prim::Exp: unary([](double, double y) { return y; }); return;
        case Prim::Log: unary([](double x, double) { return 1.0 / x; }); return;
        case Prim::Abs:
            unary([](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
            return;
        case Prim::Sqrt: unary([](double, double y) { return 0.5 / y; }); return;
        case Prim::Clamp: {
            const double lo = node.args.alpha, hi = node.args.beta;
            unary([lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
            return;
        }
        case Prim::Sum:
        case Prim::Mean: {
            if (!wants(0)) return;
            Matrix& gx = gin(0);
            const double s =
                node.kind == Prim::Sum ? g[0] : g[0] / static_cast<double>(gx.size());
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += s;
            return;
        }
        case Prim::ConcatRows: {
            std::size_t off = 0;
            for (std::size_t i = 0; i < node.inputs.size(); ++i) {
                const std::size_t len = val(i).size();
                if (wants(i)) k.axpy(len, 1.0, g.data() + off, gin(i).data());
                off += len;
            }
            return;
        }
        case Prim::ConcatCols: {
            std::size_t c0 = 0;
            for (std::size_t i = 0; i < node.inputs.size(); ++i) {
                const std::size_t w = val(i).cols();
                if (wants(i)) {
                    Matrix& gx = gin(i);
                    for (std::size_t r = 0; r < g.rows(); ++r)
                        k.axpy(w, 1.0, g.data() + r * g.cols() + c0, gx.data() + r * w);
                }
                c0 += w;
            }
            return;
        }
        case Prim::Reshape:
            if (wants(0)) k.axpy(g.size(), 1.0, g.data(), gin(0).data());
            return;
        case Prim::SliceRows:
            if (wants(0)) {
                Matrix& gx = gin(0);
                k.axpy(g.size(), 1.0, g.data(), gx.data() + node.args.m * gx.cols());
            }
            return;
        case Prim::SliceCols:
            if (wants(0)) {
                Matrix& gx = gin(0);
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t j = 0; j < g.cols(); ++j) gx(r, node.args.m + j) += g(r, j);
            }
            return;
        case Prim::MaxAll:
            if (wants(0)) {
                const auto v = val(0).values();
                const auto it = std::max_element(v.begin(), v.end());
                gin(0)[static_cast<std::size_t>(it - v.begin())] += g[0];
            }
            return;
        case Prim::ScaleBy: {
            const Matrix& a = val(0);
            const double s = val(1)[0];
            if (wants(0)) k.axpy(g.size(), s, g.data(), gin(0).data());
            if (wants(1)) gin(1)[0] += k.dot(g.size(), g.data(), a.data());
            return;
        }
        case Prim::BroadcastRows:
            if (wants(0)) {
                Matrix& gx = gin(0);
                for (std::size_t r = 0; r < g.rows(); ++r)
                    k.axpy(g.cols(), 1.0, g.data() + r * g.cols(), gx.data());
            }
            return;
        case Prim::BroadcastCols:
            if (wants(0)) {
                Matrix& gx = gin(0);
                for (std::size_t r = 0; r < g.rows(); ++r)
                    gx[r] += k.sum(g.cols(), g.data() + r * g.cols());
            }
            return;
        case Prim::Dropout:
            if (wants(0)) k.fma_acc(g.size(), g.data(), node.args.mask.data(), gin(0).data());
            return;
    }
}

void Tape::backward(Var loss) {
    if (loss.tape_ != this) throw ContractError("backward: loss belongs to a different tape");
    if (backward_done_) throw ContractError("backward: already run on this tape");
    Node& root = nodes_[loss.id_];
    if (root.value.rows() != 1 || root.value.cols() != 1)
        throw ContractError("backward: loss must be 1x1, got " + root.value.shape_str());
    backward_done_ = true;
    if (!root.requires_grad) return;
    grad_buffer(loss.id_)[0] = 1.0;
    for (std::int64_t id = loss.id_; id >= 0; --id) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.requires_grad || n.grad.empty()) continue;
        propagate(n);
    }
    for (const Node& n : nodes_) {
        if (n.kind == Prim::Param && !n.grad.empty() && !n.grad.all_finite())
            throw NumericError("backward: non-finite gradient for parameter '" + n.param->name +
                               "'");
    }
}

GradientMap Tape::gradients(std::span<Parameter* const> params) const {
    GradientMap out;
    for (Parameter* p : params) out.emplace(p, Matrix(p->value.rows(), p->value.cols()));
    for (const Node& n : nodes_) {
        if (n.kind != Prim::Param || n.grad.empty()) continue;
        auto it = out.find(n.param);
        if (it == out.end()) continue;
        kernels::active().axpy(n.grad.size(), 1.0, n.grad.data(), it->second.data());
    }
    return out;
}

void Tape::accumulate_param_grads(double scale) const {
    for (const Node& n : nodes_) {
        if (n.kind != Prim::Param || n.grad.empty()) continue;
        Parameter& p = *n.param;
        if (!p.grad.same_shape(p.value)) p.zero_grad();
        kernels::active().axpy(n.grad.size(), scale, n.grad.data(), p.grad.data());
    }
}

Matrix Tape::grad_of(Var v) const {
    const Node& n = nodes_[v.id_];
    if (n.grad.empty()) return Matrix(n.value.rows(), n.value.cols());
    return n.grad;
}

namespace {
Var apply1(Prim kind, Var a, const PrimArgs& args = {}) {
    const Var in[] = {a};
    return a.tape().apply(kind, in, args);
}
Var apply2(Prim kind, Var a, Var b) {
    const Var in[] = {a, b};
    return a.tape().apply(kind, in);
}
}  // namespace

Var matmul(Var a, Var b) { return apply2(Prim::MatMul, a, b); }
Var transpose(Var a) { return apply1(Prim::Transpose, a); }
Var operator+(Var a, Var b) { return apply2(Prim::Add, a, b); }
Var operator-(Var a, Var b) { return apply2(Prim::Subtract, a, b); }
Var hadamard(Var a, Var b) { return apply2(Prim::Hadamard, a, b); }
Var divide(Var a, Var b) { return apply2(Prim::Divide, a, b); }
Var scale_by(Var a, Var s) { return apply2(Prim::ScaleBy, a, s); }

Var scale(Var a, double factor) {
    PrimArgs args;
    args.alpha = factor;
    return apply1(Prim::Scale, a, args);
}

Var leaky_relu(Var a, double slope) {
    PrimArgs args;
    args.alpha = slope;
    return apply1(Prim::LeakyRelu, a, args);
}

Var sigmoid(Var a) { return apply1(Prim::Sigmoid, a); }
Var tanh(Var a) { return apply1(Prim::Tanh, a); }
Var exp(Var a) { return apply1(Prim::Exp, a); }
Var log(Var a) { return apply1(Prim::Log, a); }
Var sum(Var a) { return apply1(Prim::Sum, a); }
Var mean(Var a) { return apply1(Prim::Mean, a); }
Var abs(Var a) { return apply1(Prim::Abs, a); }
Var sqrt(Var a) { return apply1(Prim::Sqrt, a); }
Var max_all(Var a) { return apply1(Prim::MaxAll, a); }

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw ContractError("concat_rows: no inputs");
    return parts[0].tape().apply(Prim::ConcatRows, parts);
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ContractError("concat_cols: no inputs");
    return parts[0].tape().apply(Prim::ConcatCols, parts);
}

Var reshape(Var a, std::size_t rows, std::size_t cols) {
    PrimArgs args;
    args.m = rows;
    args.n = cols;
    return apply1(Prim::Reshape, a, args);
}

Var slice_rows(Var a, std::size_t start, std::size_t count) {
    PrimArgs args;
    args.m = start;
    args.n = count;
    return apply1(Prim::SliceRows, a, args);
}

Var slice_cols(Var a, std::size_t start, std::size_t count) {
    PrimArgs args;
    args.m = start;
    args.n = count;
    return apply1(Prim::SliceCols, a, args);
}

Var clamp(Var a, double lo, double hi) {
    PrimArgs args;
    args.alpha = lo;
    args.beta = hi;
    return apply1(Prim::Clamp, a, args);
}

Var broadcast_rows(Var row, std::size_t count) {
    PrimArgs args;
    args.m = count;
    return apply1(Prim::BroadcastRows, row, args);
}

Var broadcast_cols(Var col, std::size_t count) {
    PrimArgs args;
    args.m = count;
    return apply1(Prim::BroadcastCols, col, args);
}

Var dropout(Var a, double rate, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ContractError("dropout: rate must be in [0, 1)");
    PrimArgs args;
    args.mask = Matrix(a.rows(), a.cols());
    const double keep = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < args.mask.size(); ++i)
        args.mask[i] = rng.uniform() < rate ? 0.0 : keep;
    return apply1(Prim::Dropout, a, args);
}

}  // namespace sgnet
