#include "sgnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "sgnet/error.hpp"

namespace sgnet {
namespace {

double evaluate(const LossBuilder& builder) {
    Tape tape;
    return builder(tape).value().scalar_value();
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& builder, std::span<Parameter* const> params,
                           double eps) {
    if (!(eps > 1e-7 && eps < 1e-3)) throw ContractError("grad_check: eps must lie in (1e-7, 1e-3)");

    GradientMap analytic;
    double base = 0.0;
    {
        Tape tape;
        Var loss = builder(tape);
        base = loss.value().scalar_value();
        tape.backward(loss);
        analytic = tape.gradients(params);
    }
    if (evaluate(builder) != base)
        throw ContractError("grad_check: loss builder is not deterministic");

    GradCheckResult result;
    for (Parameter* p : params) {
        const Matrix& g = analytic.at(p);
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + eps;
            const double up = evaluate(builder);
            p->value[i] = orig - eps;
            const double down = evaluate(builder);
            p->value[i] = orig;
            const double numeric = (up - down) / (2.0 * eps);
            const double denom = std::max({1.0, std::abs(g[i]), std::abs(numeric)});
            result.max_discrepancy = std::max(result.max_discrepancy, std::abs(g[i] - numeric) / denom);
            ++result.entries_checked;
        }
    }
    return result;
}

}  // namespace sgnet
