#include "sgnet/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgnet/error.hpp"
#include "sgnet/gaussian_kl.hpp"

namespace sgnet {

namespace {

void require_square(const Matrix& a, const char* what) {
    if (a.rows() == 0 || a.rows() != a.cols())
        throw DimensionError(std::string(what) + ": expected a square matrix, got " + a.shape_str());
}

void require_nonnegative(const Matrix& a, const char* what) {
    for (double v : a.values())
        if (!(v >= 0.0)) throw ContractError(std::string(what) + ": negative or NaN edge weight");
}

double max_entry(const Matrix& a) { return *std::max_element(a.values().begin(), a.values().end()); }

struct ShortestPaths {
    std::vector<double> dist;
    std::vector<double> sigma;
    std::vector<std::vector<std::size_t>> preds;
    std::vector<std::size_t> order;  // nodes in the order they were settled
};

// Dense Dijkstra on edge lengths 1/w from `s`, counting shortest paths.
void dijkstra(const Matrix& a, std::size_t s, ShortestPaths& sp) {
    const std::size_t n = a.rows();
    const double inf = std::numeric_limits<double>::infinity();
    sp.dist.assign(n, inf);
    sp.sigma.assign(n, 0.0);
    sp.preds.assign(n, {});
    sp.order.clear();
    std::vector<char> settled(n, 0);
    sp.dist[s] = 0.0;
    sp.sigma[s] = 1.0;
    for (;;) {
        std::size_t u = n;
        for (std::size_t i = 0; i < n; ++i)
            if (!settled[i] && sp.dist[i] < inf && (u == n || sp.dist[i] < sp.dist[u])) u = i;
        if (u == n) break;
        settled[u] = 1;
        sp.order.push_back(u);
        for (std::size_t v = 0; v < n; ++v) {
            const double w = a(u, v);
            if (v == u || settled[v] || w <= 0.0) continue;
            const double nd = sp.dist[u] + 1.0 / w;
            if (nd < sp.dist[v]) {
                sp.dist[v] = nd;
                sp.sigma[v] = sp.sigma[u];
                sp.preds[v].assign(1, u);
            } else if (nd == sp.dist[v]) {
                sp.sigma[v] += sp.sigma[u];
                sp.preds[v].push_back(u);
            }
        }
    }
}

Matrix upper_mask(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m(i, j) = 1.0;
    return m;
}

Matrix offdiag_mask(std::size_t n) {
    Matrix m(n, n, 1.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.0;
    return m;
}

}  // namespace

CentralityVector eigenvector_centrality(const Matrix& a, double tol, std::size_t max_iter,
                                        std::size_t* iterations) {
    require_square(a, "eigenvector_centrality");
    require_nonnegative(a, "eigenvector_centrality");
    const std::size_t n = a.rows();
    const double shift = 0.5 * max_entry(a);
    if (shift == 0.0) throw ContractError("eigenvector_centrality: graph has no edges");

    std::vector<double> c(n, 1.0 / std::sqrt(static_cast<double>(n))), next(n);
    double residual = 0.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        double norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = shift * c[i];
            const auto row = a.row(i);
            for (std::size_t j = 0; j < n; ++j) acc += row[j] * c[j];
            next[i] = acc;
            norm2 += acc * acc;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        double diff2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] *= inv;
            diff2 += (next[i] - c[i]) * (next[i] - c[i]);
        }
        c.swap(next);
        residual = std::sqrt(diff2);
        if (residual < tol) {
            if (iterations) *iterations = it;
            return {std::move(c), CentralityKind::Eigenvector};
        }
    }
    throw ConvergenceError("eigenvector_centrality: no convergence within " +
                           std::to_string(max_iter) + " iterations (residual " +
                           std::to_string(residual) + ")");
}

Var eigenvector_centrality(Var a, std::size_t iterations) {
    require_square(a.value(), "eigenvector_centrality");
    if (iterations == 0) throw ContractError("eigenvector_centrality: iterations must be positive");
    if (max_entry(a.value()) <= 0.0)
        throw ContractError("eigenvector_centrality: graph has no edges");
    Tape& t = a.tape();
    const std::size_t n = a.rows();
    const Var shift = scale(max_all(a), 0.5);
    Var c = t.constant(Matrix(n, 1, 1.0 / std::sqrt(static_cast<double>(n))));
    for (std::size_t it = 0; it < iterations; ++it) {
        const Var v = matmul(a, c) + scale_by(c, shift);
        const Var norm = sqrt(sum(hadamard(v, v)));
        c = divide(v, broadcast_rows(norm, n));
    }
    return c;
}

CentralityVector betweenness_centrality(const Matrix& a) {
    require_square(a, "betweenness_centrality");
    require_nonnegative(a, "betweenness_centrality");
    const std::size_t n = a.rows();
    std::vector<double> bc(n, 0.0), delta(n);
    ShortestPaths sp;
    for (std::size_t s = 0; s < n; ++s) {
        dijkstra(a, s, sp);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto it = sp.order.rbegin(); it != sp.order.rend(); ++it) {
            const std::size_t w = *it;
            for (std::size_t v : sp.preds[w]) delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
            if (w != s) bc[w] += delta[w];
        }
    }
    if (n > 2) {
        // Each unordered pair was visited from both ends.
        const double norm = 0.5 * static_cast<double>(n - 1) * static_cast<double>(n - 2);
        for (double& v : bc) v = 0.5 * v / norm;
    } else {
        std::fill(bc.begin(), bc.end(), 0.0);
    }
    return {std::move(bc), CentralityKind::Betweenness};
}

CentralityVector closeness_centrality(const Matrix& a) {
    require_square(a, "closeness_centrality");
    require_nonnegative(a, "closeness_centrality");
    const std::size_t n = a.rows();
    std::vector<double> cc(n, 0.0);
    if (n < 2) return {std::move(cc), CentralityKind::Closeness};
    ShortestPaths sp;
    for (std::size_t s = 0; s < n; ++s) {
        dijkstra(a, s, sp);
        double total = 0.0;
        std::size_t reach = 0;
        for (std::size_t v = 0; v < n; ++v)
            if (v != s && std::isfinite(sp.dist[v])) {
                total += sp.dist[v];
                ++reach;
            }
        if (reach > 0 && total > 0.0) {
            const double r = static_cast<double>(reach);
            cc[s] = (r / total) * (r / static_cast<double>(n - 1));
        }
    }
    return {std::move(cc), CentralityKind::Closeness};
}

double pcc(const Matrix& x, const Matrix& y) {
    require_square(x, "pcc");
    if (!x.same_shape(y))
        throw DimensionError("pcc: shapes " + x.shape_str() + " and " + y.shape_str());
    const std::size_t n = x.rows();
    double mx = 0.0, my = 0.0, count = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            mx += x(i, j);
            my += y(i, j);
            count += 1.0;
        }
    if (count < 2.0) throw ContractError("pcc: need at least two upper-triangle entries");
    mx /= count;
    my /= count;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x(i, j) - mx, dy = y(i, j) - my;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    if (sxx == 0.0 || syy == 0.0) throw ContractError("pcc: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Var pcc(Var x, const Matrix& y) {
    require_square(x.value(), "pcc");
    if (!x.value().same_shape(y))
        throw DimensionError("pcc: shapes " + x.value().shape_str() + " and " + y.shape_str());
    const std::size_t n = y.rows();
    if (n < 3) throw ContractError("pcc: need at least two upper-triangle entries");
    Tape& t = x.tape();
    const Matrix upper = upper_mask(n);
    const double count = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);

    double my = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) my += upper[i] * y[i];
    my /= count;
    Matrix dy(n, n);
    double syy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        dy[i] = upper[i] * (y[i] - my);
        syy += dy[i] * dy[i];
    }
    if (syy == 0.0) throw ContractError("pcc: zero variance");

    const Var u = t.constant(upper);
    const Var mx = scale(sum(hadamard(x, u)), 1.0 / count);
    const Var dx = hadamard(x - broadcast_cols(broadcast_rows(mx, n), n), u);
    const Var sxx = sum(hadamard(dx, dx));
    if (sxx.value()[0] == 0.0) throw ContractError("pcc: zero variance");
    const Var sxy = sum(hadamard(dx, t.constant(std::move(dy))));
    return clamp(divide(sxy, sqrt(scale(sxx, syy))), -1.0, 1.0);
}

GtpLoss gtp_loss(Var pred, const Matrix& real, Var disc_out, const GtpLossWeights& w,
                 std::size_t ec_iterations) {
    require_square(real, "gtp_loss");
    if (!pred.value().same_shape(real))
        throw DimensionError("gtp_loss: prediction " + pred.value().shape_str() + " vs target " +
                             real.shape_str());
    if (disc_out.rows() != 1 || disc_out.cols() != 1)
        throw DimensionError("gtp_loss: discriminator output must be 1x1, got " +
                             disc_out.value().shape_str());
    Tape& t = pred.tape();
    const std::size_t n = real.rows();
    GtpLoss out;
    std::vector<Var> terms;

    if (w.adversarial != 0.0) {
        const Var adv = scale(log(disc_out), -1.0);
        out.adversarial = adv.value()[0];
        terms.push_back(scale(adv, w.adversarial));
    }
    if (w.l1 != 0.0) {
        const double denom = static_cast<double>(n) * static_cast<double>(n > 1 ? n - 1 : 1);
        const Var l1 = scale(sum(hadamard(abs(pred - t.constant(real)), t.constant(offdiag_mask(n)))),
                             1.0 / denom);
        out.l1 = l1.value()[0];
        terms.push_back(scale(l1, w.l1));
    }
    if (w.pcc != 0.0) {
        const Var lp = t.constant(Matrix::scalar(1.0)) - pcc(pred, real);
        out.pcc = lp.value()[0];
        terms.push_back(scale(lp, w.pcc));
    }
    if (w.topology != 0.0) {
        std::size_t iters = ec_iterations;
        if (iters == 0) eigenvector_centrality(real, 1e-12, 10000, &iters);
        // The target centrality runs through the identical unrolled iteration
        // so that pred == real gives exactly zero.
        Tape scratch;
        const Matrix ec_real = eigenvector_centrality(scratch.constant(real), iters).value();
        const Var ec_pred = eigenvector_centrality(pred, iters);
        const Var lt = scale(sum(abs(ec_pred - t.constant(ec_real))), 1.0 / static_cast<double>(n));
        out.topology = lt.value()[0];
        terms.push_back(scale(lt, w.topology));
    }
    if (terms.empty()) {
        out.total = t.constant(Matrix::scalar(0.0));
    } else {
        out.total = terms.front();
        for (std::size_t i = 1; i < terms.size(); ++i) out.total = out.total + terms[i];
    }
    return out;
}

double mean_offdiag_abs_diff(const Matrix& pred, const Matrix& real) {
    require_square(real, "mean_offdiag_abs_diff");
    if (!pred.same_shape(real))
        throw DimensionError("mean_offdiag_abs_diff: " + pred.shape_str() + " vs " + real.shape_str());
    const std::size_t n = real.rows();
    if (n < 2) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) total += std::abs(pred(i, j) - real(i, j));
    return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

namespace {

double mean_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

void pooled_moments(std::span<const Matrix> graphs, double& mean, double& var) {
    double s = 0.0, s2 = 0.0, count = 0.0;
    for (const Matrix& g : graphs)
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = i + 1; j < g.cols(); ++j) {
                s += g(i, j);
                count += 1.0;
            }
    mean = s / count;
    for (const Matrix& g : graphs)
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = i + 1; j < g.cols(); ++j) s2 += (g(i, j) - mean) * (g(i, j) - mean);
    var = s2 / count;
}

}  // namespace

MetricReport evaluate_metrics(std::span<const Matrix> preds, std::span<const Matrix> reals) {
    if (preds.empty() || preds.size() != reals.size())
        throw ContractError("evaluate_metrics: need equally many predictions and targets");
    MetricReport r;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        r.mae += mean_offdiag_abs_diff(preds[k], reals[k]);
        r.mae_bc += mean_abs_diff(betweenness_centrality(preds[k]).values,
                                  betweenness_centrality(reals[k]).values);
        r.mae_cc += mean_abs_diff(closeness_centrality(preds[k]).values,
                                  closeness_centrality(reals[k]).values);
        r.mae_ec += mean_abs_diff(eigenvector_centrality(preds[k]).values,
                                  eigenvector_centrality(reals[k]).values);
    }
    const double m = static_cast<double>(preds.size());
    r.mae /= m;
    r.mae_bc /= m;
    r.mae_cc /= m;
    r.mae_ec /= m;
    double mp, vp, mr, vr;
    pooled_moments(preds, mp, vp);
    pooled_moments(reals, mr, vr);
    r.kl = kl_gaussian(mp, vp, mr, vr);
    return r;
}

}  // namespace sgnet
