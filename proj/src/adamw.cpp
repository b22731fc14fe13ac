#include "sgnet/adamw.hpp"

#include <cmath>

#include "sgnet/error.hpp"
#include "sgnet/kernels.hpp"

namespace sgnet {

void AdamW::update(std::span<Parameter* const> params, const GradientMap& grads, double lr) {
    std::vector<const Matrix*> g;
    g.reserve(params.size());
    for (Parameter* p : params) {
        auto it = grads.find(p);
        if (it == grads.end())
            throw ContractError("AdamW: missing gradient for parameter '" + p->name + "'");
        g.push_back(&it->second);
    }
    apply(params, g, lr);
}

void AdamW::update_from_accumulated(std::span<Parameter* const> params, double lr) {
    std::vector<const Matrix*> g;
    g.reserve(params.size());
    for (Parameter* p : params) {
        if (!p->grad.same_shape(p->value))
            throw ContractError("AdamW: missing gradient for parameter '" + p->name + "'");
        g.push_back(&p->grad);
    }
    apply(params, g, lr);
}

void AdamW::apply(std::span<Parameter* const> params, std::span<const Matrix* const> grads,
                  double lr) {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ContractError("AdamW: learning rate must be >= 0");
    if (m_.empty()) {
        for (Parameter* p : params) {
            m_.emplace_back(p->value.rows(), p->value.cols());
            v_.emplace_back(p->value.rows(), p->value.cols());
        }
    }
    if (m_.size() != params.size())
        throw ContractError("AdamW: parameter list changed size between updates");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!m_[i].same_shape(params[i]->value) || !grads[i]->same_shape(params[i]->value))
            throw DimensionError("AdamW: shape mismatch for parameter '" + params[i]->name + "'");
        if (!grads[i]->all_finite())
            throw NumericError("AdamW: non-finite gradient for parameter '" + params[i]->name + "'");
    }
    ++step_;
    const double t = static_cast<double>(step_);
    const kernels::AdamWScalars s{lr,
                                  options_.beta1,
                                  options_.beta2,
                                  options_.eps,
                                  options_.weight_decay,
                                  1.0 - std::pow(options_.beta1, t),
                                  1.0 - std::pow(options_.beta2, t)};
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& w = params[i]->value;
        k.adamw(w.size(), w.data(), grads[i]->data(), m_[i].data(), v_[i].data(), s);
    }
}

}  // namespace sgnet
