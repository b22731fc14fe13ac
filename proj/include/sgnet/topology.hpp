#pragma once

// Node centralities, Pearson correlation, the ground-truth-preserving (GT-P)
// generator loss and the evaluation metrics.

#include <cstddef>
#include <span>
#include <vector>

#include "sgnet/autodiff.hpp"

namespace sgnet {

enum class CentralityKind { Eigenvector, Betweenness, Closeness };

struct CentralityVector {
    std::vector<double> values;
    CentralityKind kind;
};

/// Power iteration from the uniform vector on A + s*I, s = max(A)/2. The shift
/// leaves the eigenvectors unchanged and breaks the +/- lambda tie of
/// bipartite graphs. Stops when successive normalised iterates differ by less
/// than `tol` in L2. The result is L2-normalised and entrywise nonnegative.
CentralityVector eigenvector_centrality(const Matrix& a, double tol = 1e-12,
                                        std::size_t max_iter = 10000,
                                        std::size_t* iterations = nullptr);

/// Differentiable eigenvector centrality: the same iteration unrolled for a
/// fixed number of steps. Returns an n x 1 column.
Var eigenvector_centrality(Var a, std::size_t iterations);

/// Brandes' algorithm on edge distances 1/w (w > 0), undirected, normalised
/// by (n-1)(n-2)/2.
CentralityVector betweenness_centrality(const Matrix& a);

/// (r/(n-1)) * r / sum of distances to the r reachable nodes; 0 if isolated.
CentralityVector closeness_centrality(const Matrix& a);

/// Pearson correlation over the strict upper triangle.
double pcc(const Matrix& x, const Matrix& y);
Var pcc(Var x, const Matrix& y);

struct GtpLossWeights {
    double adversarial = 1.0;
    double l1 = 1.0;
    double pcc = 0.1;
    double topology = 2.0;
};

struct GtpLoss {
    Var total;
    double adversarial = 0.0;
    double l1 = 0.0;
    double pcc = 0.0;  // 1 - PCC
    double topology = 0.0;
};

/// lambda1 * (-log D) + lambda2 * mean|pred-real| + lambda3 * (1 - PCC)
///   + lambda4 * mean|EC(pred) - EC(real)|,
/// L1 over off-diagonal entries, EC through `ec_iterations` unrolled power
/// steps (0 selects the depth at which the real graph's iteration converges).
/// A term whose weight is zero is neither computed nor differentiated.
GtpLoss gtp_loss(Var pred, const Matrix& real, Var disc_out, const GtpLossWeights& w,
                 std::size_t ec_iterations = 50);

struct MetricReport {
    double mae = 0.0;
    double mae_bc = 0.0;
    double mae_cc = 0.0;
    double mae_ec = 0.0;
    double kl = 0.0;
};

/// Mean absolute off-diagonal error, mean absolute centrality errors (averaged
/// over nodes, then subjects) and KL(pred || real) between univariate Gaussian
/// fits of the pooled off-diagonal edge weights.
MetricReport evaluate_metrics(std::span<const Matrix> preds, std::span<const Matrix> reals);

double mean_offdiag_abs_diff(const Matrix& pred, const Matrix& real);

}  // namespace sgnet
