#pragma once

#include <functional>
#include <span>

#include "sgnet/autodiff.hpp"

namespace sgnet {

/// Builds a scalar loss on a fresh tape. Must be deterministic: any RNG it
/// uses has to be re-seeded inside the builder.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckResult {
    double max_discrepancy = 0.0;
    std::size_t entries_checked = 0;
};

/// Compares reverse-mode gradients with central differences over every entry
/// of every listed parameter. Discrepancy per entry is
/// |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckResult grad_check(const LossBuilder& builder, std::span<Parameter* const> params,
                           double eps = 1e-5);

}  // namespace sgnet
