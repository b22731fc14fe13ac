#pragma once

// Define-by-run reverse-mode differentiation over dense matrices.
//
// A Tape records every primitive application as a node. Nodes are appended in
// evaluation order, so the recorded graph is acyclic by construction and a
// single reverse sweep visits every node after all of its consumers. A fresh
// Tape is built for each forward pass.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sgnet/matrix.hpp"

namespace sgnet {

class Rng;
class Tape;

/// A trainable matrix. `grad` is the accumulation buffer consumed by optimizers.
struct Parameter {
    Parameter() = default;
    Parameter(std::string name, Matrix value);

    std::string name;
    Matrix value;
    Matrix grad;

    void zero_grad();
};

enum class Prim : std::uint8_t {
    Constant,
    Param,
    // required set
    MatMul,
    Transpose,
    Add,
    Subtract,
    Hadamard,
    Scale,
    LeakyRelu,
    Sigmoid,
    Tanh,
    Exp,
    Log,
    Sum,
    Mean,
    Abs,
    ConcatRows,
    Reshape,
    // extensions used by the layers
    ConcatCols,
    SliceRows,
    SliceCols,
    Divide,
    Sqrt,
    Clamp,
    MaxAll,
    ScaleBy,
    BroadcastRows,
    BroadcastCols,
    Dropout,
};

std::string_view prim_name(Prim kind);

/// Scalar/integer attributes of a primitive; which fields are read depends on the kind.
struct PrimArgs {
    double alpha = 0.0;  // Scale factor, LeakyRelu slope, Clamp lower bound
    double beta = 0.0;   // Clamp upper bound
    std::size_t m = 0;   // Reshape rows, slice start, broadcast count
    std::size_t n = 0;   // Reshape cols, slice length
    Matrix mask;         // Dropout mask (already rescaled)
};

/// Handle to a node on a Tape. Cheap to copy; valid while its Tape lives.
class Var {
public:
    Var() = default;

    const Matrix& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    Tape& tape() const { return *tape_; }
    std::uint32_t id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }
    bool requires_grad() const;

private:
    friend class Tape;
    Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::uint32_t id_ = 0;
};

using GradientMap = std::unordered_map<const Parameter*, Matrix>;

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Non-differentiable leaf. Non-finite entries raise NumericError.
    Var constant(Matrix value);
    /// Differentiable leaf bound to `p`; its gradient is reported for `p`.
    Var param(Parameter& p);
    /// Reads `p` as a constant (no gradient flows to it).
    Var frozen(const Parameter& p) { return constant(p.value); }

    /// Applies a primitive; errors name the primitive and offending shapes.
    Var apply(Prim kind, std::span<const Var> inputs, const PrimArgs& args = {});

    /// Reverse sweep from a 1x1 loss. May be called once per tape.
    void backward(Var loss);

    /// Gradient for each listed parameter; parameters the loss does not reach get zeros.
    GradientMap gradients(std::span<Parameter* const> params) const;

    /// p.grad += scale * dloss/dp for every parameter leaf on this tape.
    void accumulate_param_grads(double scale = 1.0) const;

    /// Gradient of the loss with respect to an arbitrary node (zeros if unreached).
    Matrix grad_of(Var v) const;

    const Matrix& value(Var v) const { return nodes_[v.id_].value; }
    bool requires_grad(Var v) const { return nodes_[v.id_].requires_grad; }
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Prim kind;
        Matrix value;
        Matrix grad;
        std::vector<std::uint32_t> inputs;
        PrimArgs args;
        Parameter* param = nullptr;
        bool requires_grad = false;
    };

    Var push(Node node);
    void propagate(const Node& node);
    Matrix& grad_buffer(std::uint32_t id);

    std::deque<Node> nodes_;
    bool backward_done_ = false;
};

// Convenience wrappers over Tape::apply. Binary operations require both
// operands on the same tape.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double factor);
Var leaky_relu(Var a, double slope = 0.1);
Var sigmoid(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var sum(Var a);
Var mean(Var a);
Var abs(Var a);
Var concat_rows(std::span<const Var> parts);
Var reshape(Var a, std::size_t rows, std::size_t cols);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t start, std::size_t count);
Var slice_cols(Var a, std::size_t start, std::size_t count);
Var divide(Var a, Var b);
Var sqrt(Var a);
Var clamp(Var a, double lo, double hi);
Var max_all(Var a);
/// a * s for a 1x1 node s.
Var scale_by(Var a, Var s);
/// Repeats a 1 x d row `count` times.
Var broadcast_rows(Var row, std::size_t count);
/// Repeats an n x 1 column `count` times.
Var broadcast_cols(Var col, std::size_t count);
/// Inverted dropout: zero with probability `rate`, survivors scaled by 1/(1-rate).
/// The mask is drawn from `rng` once and replayed during the reverse sweep.
Var dropout(Var a, double rate, Rng& rng);

}  // namespace sgnet
