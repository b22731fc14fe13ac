#include "sgnet/gaussian_kl.hpp"

#include <cmath>

#include "sgnet/error.hpp"

namespace sgnet {

double kl_gaussian(double mean_q, double var_q, double mean_p, double var_p) {
    if (!(var_q > 0.0) || !(var_p > 0.0))
        throw NumericError("kl_gaussian: variances must be positive");
    const double d = mean_q - mean_p;
    return 0.5 * (std::log(var_p / var_q) + (var_q + d * d) / var_p - 1.0);
}

double kl_gaussian(std::span<const double> mean_q, std::span<const double> var_q,
                   std::span<const double> mean_p, std::span<const double> var_p) {
    if (mean_q.size() != var_q.size() || mean_q.size() != mean_p.size() ||
        mean_q.size() != var_p.size())
        throw DimensionError("kl_gaussian: dimension mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < mean_q.size(); ++i)
        total += kl_gaussian(mean_q[i], var_q[i], mean_p[i], var_p[i]);
    return total;
}

Var kl_gaussian(Var mu_q, Var logvar_q, const Matrix& mean_p, const Matrix& var_p) {
    Tape& t = mu_q.tape();
    const std::size_t n = mu_q.rows(), d = mu_q.cols();
    if (!logvar_q.value().same_shape(mu_q.value()) || mean_p.rows() != 1 || mean_p.cols() != d ||
        !var_p.same_shape(mean_p))
        throw DimensionError("kl_gaussian: q is " + mu_q.value().shape_str() + ", p is " +
                             mean_p.shape_str());
    Matrix inv_vp(n, d), mp(n, d), log_vp(n, d);
    for (std::size_t j = 0; j < d; ++j) {
        if (!(var_p[j] > 0.0)) throw NumericError("kl_gaussian: prior variance must be positive");
        for (std::size_t r = 0; r < n; ++r) {
            inv_vp(r, j) = 1.0 / var_p[j];
            mp(r, j) = mean_p[j];
            log_vp(r, j) = std::log(var_p[j]);
        }
    }
    // 0.5 * (log vp - logvar + (exp(logvar) + (mu - mp)^2) / vp - 1)
    const Var diff = mu_q - t.constant(std::move(mp));
    const Var ratio = hadamard(exp(logvar_q) + hadamard(diff, diff), t.constant(std::move(inv_vp)));
    const Var per_entry = t.constant(std::move(log_vp)) - logvar_q + ratio -
                          t.constant(Matrix::ones(n, d));
    return scale(sum(per_entry), 0.5 / static_cast<double>(n));
}

}  // namespace sgnet
