#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sgnet/autodiff.hpp"

namespace sgnet {

struct AdamWOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// AdamW with decoupled weight decay (the decay is applied to the parameter,
// not folded into the gradient). Moment buffers are created on the first
// update and keyed by position in the parameter list, so the same list order
// must be used on every call.
class AdamW {
public:
    explicit AdamW(AdamWOptions options = {}) : options_(options) {}

    /// Updates params in place from an explicit gradient map.
    void update(std::span<Parameter* const> params, const GradientMap& grads, double lr);
    /// Updates params from their accumulated Parameter::grad buffers.
    void update_from_accumulated(std::span<Parameter* const> params, double lr);

    const AdamWOptions& options() const noexcept { return options_; }
    std::size_t step() const noexcept { return step_; }

    // checkpoint access
    std::vector<Matrix>& first_moments() { return m_; }
    std::vector<Matrix>& second_moments() { return v_; }
    const std::vector<Matrix>& first_moments() const { return m_; }
    const std::vector<Matrix>& second_moments() const { return v_; }
    void set_step(std::size_t step) { step_ = step; }

private:
    void apply(std::span<Parameter* const> params, std::span<const Matrix* const> grads, double lr);

    AdamWOptions options_;
    std::size_t step_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

}  // namespace sgnet
