#pragma once

#include <span>

#include "sgnet/autodiff.hpp"

namespace sgnet {

/// KL(q || p) between univariate Gaussians given means and variances.
/// Non-positive variances raise NumericError.
double kl_gaussian(double mean_q, double var_q, double mean_p, double var_p);

/// Diagonal Gaussians: sum of per-dimension divergences.
double kl_gaussian(std::span<const double> mean_q, std::span<const double> var_q,
                   std::span<const double> mean_p, std::span<const double> var_p);

/// Differentiable form used by the aligner. q is given per node as (mu, logvar)
/// rows of an n x d matrix, p as 1 x d mean and variance rows shared by all
/// nodes. Sums over dimensions, averages over nodes.
Var kl_gaussian(Var mu_q, Var logvar_q, const Matrix& mean_p, const Matrix& var_p);

}  // namespace sgnet
