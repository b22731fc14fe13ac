// Acceptance run: one PASS/FAIL line per criterion.
//
//   sgnet_acceptance [--only 1,4,6] [--work DIR] [--keep]
//
// Exit status 0 when every selected criterion passes, 1 otherwise. Criteria 6,
// 7 and 9 train full models and take most of the running time (about half an
// hour on one core).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kl_oracle.hpp"
#include "model_fuzz.hpp"
#include "sgnet/aligner.hpp"
#include "sgnet/checkpoint.hpp"
#include "sgnet/dataset_io.hpp"
#include "sgnet/error.hpp"
#include "sgnet/gaussian_kl.hpp"
#include "sgnet/gradcheck.hpp"
#include "sgnet/layers.hpp"
#include "sgnet/pipeline.hpp"
#include "sgnet/synthgan.hpp"
#include "sgnet/topology.hpp"
#include "topology_oracle.hpp"

using namespace sgnet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Matrix weighted_graph(std::size_t n, Rng& rng, double density) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < density) a(i, j) = a(j, i) = 0.05 + 0.95 * rng.uniform();
    return a;
}

// ---------------------------------------------------------------- 1

// Leaky-ReLU and |x| kinks within 1e-5 of a random evaluation point do occur
// in a few thousand entries; 1e-6 keeps central differences on one side.
constexpr double kEps = 1e-6;

Outcome gradient_integrity() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::string worst_case;
    std::size_t checks = 0, entries = 0;
    std::map<std::string, double> timing;
    auto last = Clock::now();
    auto record = [&](const std::string& name, std::uint64_t seed, const GradCheckResult& r) {
        timing[name] += seconds_since(last);
        last = Clock::now();
        ++checks;
        entries += r.entries_checked;
        if (r.max_discrepancy > worst || !std::isfinite(r.max_discrepancy)) {
            worst = std::isfinite(r.max_discrepancy) ? r.max_discrepancy : INFINITY;
            worst_case = name + " seed " + std::to_string(seed);
        }
    };
    // Narrow layers keep every-entry central differences inside the time budget.
    const InterDims inter_dims{8, 4, 4, 10, 4};
    const IntraDims intra_dims{10, 6, 6, 12, 4};

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(1000 + seed);
        const std::size_t n = 5 + rng.uniform_index(4);
        {
            auto layer = Dense::init("d", 4, 3, rng);
            const Matrix x = Matrix::random_normal(n, 4, rng);
            Parameter* ps[] = {&layer.weight, &layer.bias};
            record("dense", seed, grad_check([&](Tape& t) { return sum(tanh(layer.forward(t, t.constant(x), {}))); }, ps, kEps));
        }
        {
            auto layer = EdgeGcnLayer::init("e", 3, 2, rng);
            layer.filter_b2.value = Matrix::random_normal(layer.filter_b2.value.rows(), layer.filter_b2.value.cols(), rng, 0.5);
            Parameter adj("adj", weighted_graph(n, rng, 0.8));
            const Matrix x = Matrix::random_normal(n, 3, rng);
            Matrix off = Matrix::ones(n, n);
            for (std::size_t i = 0; i < n; ++i) off(i, i) = 0.0;
            Parameter* ps[] = {&layer.filter_w1, &layer.filter_b1, &layer.filter_w2,
                               &layer.filter_b2, &layer.self_weight, &layer.bias, &adj};
            // Zero entries of the adjacency stay unperturbed: the aggregation
            // mask is a step at 0.
            Matrix keep = adj.value;
            record("edge_gcn", seed, grad_check([&](Tape& t) {
                       const Var a = hadamard(t.param(adj), t.constant(off));
                       return sum(tanh(edge_gcn_forward(t, t.constant(x), a, layer, {})));
                   }, std::span<Parameter* const>(ps, 6), kEps));
            Parameter* pa[] = {&adj};
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (i != j) adj.value(i, j) = 0.1 + 0.9 * rng.uniform();
            record("edge_gcn(adjacency)", seed, grad_check([&](Tape& t) {
                       const Var a = hadamard(t.param(adj), t.constant(off));
                       return sum(tanh(edge_gcn_forward(t, t.constant(x), a, layer, {})));
                   }, pa, kEps));
            adj.value = keep;
        }
        {
            auto layer = NodeGcnLayer::init("n", 4, 3, rng);
            Parameter adj("adj", weighted_graph(n, rng, 0.8));
            Parameter x("x", Matrix::random_normal(n, 4, rng));
            Parameter* ps[] = {&layer.weight, &layer.bias, &x, &adj};
            record("node_gcn", seed, grad_check([&](Tape& t) {
                       return sum(tanh(node_gcn_forward(t, t.param(x), t.param(adj), layer, {})));
                   }, ps, kEps));
        }
        {
            auto cfg = NormDropConfig::init("bn", 3);
            cfg.gain.value = Matrix::random_uniform(1, 3, rng, 0.5, 1.5);
            cfg.shift.value = Matrix::random_normal(1, 3, rng);
            Parameter x("x", Matrix::random_normal(n, 3, rng));
            const Matrix w = Matrix::random_normal(n, 3, rng);
            Parameter* ps[] = {&cfg.gain, &cfg.shift, &x};
            record("norm_drop", seed, grad_check([&](Tape& t) {
                       Rng drop(seed);
                       const ForwardContext ctx{Mode::Train, &drop, true, false};
                       return sum(hadamard(norm_drop(t, t.param(x), cfg, ctx), t.constant(w)));
                   }, ps, kEps));
        }
        {
            Parameter z("z", Matrix::random_normal(n, 4, rng));
            const Matrix w = Matrix::random_normal(4, 4, rng);
            Parameter* ps[] = {&z};
            record("resolution_map", seed, grad_check([&](Tape& t) {
                       return sum(hadamard(resolution_map(t.param(z)), t.constant(w)));
                   }, ps, kEps));
        }
        {
            InterGanParams pi = InterGanParams::init(inter_dims, rng);
            IntraGanParams ph = IntraGanParams::init(intra_dims, rng);
            const Matrix ri = test::random_graph(10, rng), fi = test::random_graph(10, rng);
            const Matrix rh = test::random_graph(12, rng), fh = test::random_graph(12, rng);
            ParamRefs refs;
            pi.collect_discriminator(refs);
            ph.collect_discriminator(refs);
            auto disc_builder = [&](Tape& t) {
                Rng drop(seed);
                const ForwardContext ctx{Mode::Train, &drop, true, false};
                return discriminator_loss(discriminate(t, t.constant(ri), pi, ctx),
                                          discriminate(t, t.constant(fi), pi, ctx)) +
                       discriminator_loss(discriminate(t, t.constant(rh), ph, ctx),
                                          discriminate(t, t.constant(fh), ph, ctx));
            };
            record("graph discriminators", seed, grad_check([&](Tape& t) {
                       Rng drop(seed);
                       const ForwardContext ctx{Mode::Train, &drop, true, false};
                       return discriminator_loss(discriminate(t, t.constant(ri), pi, ctx),
                                                 discriminate(t, t.constant(fi), pi, ctx)) +
                              discriminator_loss(discriminate(t, t.constant(rh), ph, ctx),
                                                 discriminate(t, t.constant(fh), ph, ctx));
                   }, refs.params, kEps));
        }
        {
            auto params = AlignerParams::init(AlignerDims{8, 6, 6, 8, 6, 4}, rng);
            const Matrix x = test::random_graph(8, rng);
            const std::vector<Matrix> targets{test::random_graph(10, rng), test::random_graph(10, rng)};
            const auto prior = LatentPrior::lifted(targets, lift_projection(params.dims.latent, 3));
            ParamRefs refs;
            params.collect_generator(refs);
            record("L_align", seed, grad_check([&](Tape& t) {
                       Rng noise(seed);
                       const ForwardContext ctx{Mode::Train, &noise, true, false};
                       const auto out = align_forward(t, t.constant(x), params, ctx);
                       ForwardContext frozen = ctx;
                       frozen.trainable = false;
                       const Var d = latent_discriminate(t, out.code.z, params, frozen);
                       return alignment_loss(t.constant(x), out.graph, out.code, prior, d, {1, 0.1, 0.001}).total;
                   }, refs.params, kEps));
            ParamRefs drefs;
            params.collect_discriminator(drefs);
            record("latent discriminator", seed, grad_check([&](Tape& t) {
                       Rng noise(seed);
                       const ForwardContext ctx{Mode::Train, &noise, true, false};
                       const Var z_fake = t.constant(Matrix::random_normal(8, params.dims.latent, noise));
                       const Var z_real = t.constant(Matrix::random_normal(8, params.dims.latent, noise));
                       return discriminator_loss(latent_discriminate(t, z_real, params, ctx),
                                                 latent_discriminate(t, z_fake, params, ctx));
                   }, drefs.params, kEps));
        }
        {
            InterGanParams pi = InterGanParams::init(inter_dims, rng);
            IntraGanParams ph = IntraGanParams::init(intra_dims, rng);
            const Matrix x = test::random_graph(8, rng);
            const Matrix real_lr = test::random_graph(10, rng), real_hr = test::random_graph(12, rng);
            ParamRefs refs;
            pi.collect_generator(refs);
            ph.collect_generator(refs);
            record("GT-P (inter + intra)", seed, grad_check([&](Tape& t) {
                       Rng drop(seed);
                       const ForwardContext ctx{Mode::Train, &drop, true, false};
                       ForwardContext frozen = ctx;
                       frozen.trainable = false;
                       const Var lr = inter_generate(t, t.constant(x), pi, ctx);
                       const Var hr = intra_generate(t, lr, ph, ctx);
                       const GtpLossWeights w{1, 1, 0.1, 2};
                       return gtp_loss(lr, real_lr, discriminate(t, lr, pi, frozen), w).total +
                              gtp_loss(hr, real_hr, discriminate(t, hr, ph, frozen), w).total;
                   }, refs.params, kEps));
        }
    }
    const double secs = seconds_since(t0);
    if (std::getenv("SGNET_ACCEPT_TIMING"))
        for (const auto& [k, v] : timing) std::cerr << "  " << k << " " << v << " s\n";
    Outcome o;
    o.pass = worst < 1e-4 && secs < 120.0;
    o.detail = "max discrepancy " + fmt("%.2e", worst) + " (" + worst_case + ") over " + std::to_string(checks) +
               " checks, " + std::to_string(entries) + " entries, 20 seeds, eps " + fmt("%.0e", kEps) + ", " + fmt("%.1f", secs) +
               " s (need < 1e-4, < 120 s)";
    return o;
}

// ---------------------------------------------------------------- 2

Outcome centrality_oracles() {
    Rng rng(2024);
    int bc_cc_bad = 0, ec_bad = 0;
    double bc_err = 0.0, cc_err = 0.0, ec_err = 0.0;
    for (int g = 0; g < 100; ++g) {
        const std::size_t n = 2 + rng.uniform_index(6);
        Matrix a = weighted_graph(n, rng, 0.6);
        if (g % 3 == 0)  // weights in {0, 0.5, 1}: exactly tied shortest paths
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * rng.uniform_index(3);
        const auto oracle = test::enumerate_paths(a);
        const auto bc = betweenness_centrality(a), cc = closeness_centrality(a);
        bool ok = true;
        for (std::size_t v = 0; v < n; ++v) {
            const double eb = std::abs(bc.values[v] - oracle.betweenness[v]);
            const double ec = std::abs(cc.values[v] - test::closeness_from(oracle, v));
            bc_err = std::max(bc_err, eb);
            cc_err = std::max(cc_err, ec);
            ok &= eb <= 1e-12 && ec <= 1e-12;
        }
        bc_cc_bad += !ok;
    }
    for (int g = 0; g < 50; ++g) {
        const std::size_t n = 2 + rng.uniform_index(19);
        Matrix a = weighted_graph(n, rng, 0.8);
        if (a.values()[1] == 0.0) a(0, 1) = a(1, 0) = 0.5;  // at least one edge
        const auto c = eigenvector_centrality(a);
        const auto oracle = test::jacobi_leading_eigenvector(a);
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) e = std::max(e, std::abs(c.values[i] - oracle[i]));
        ec_err = std::max(ec_err, e);
        ec_bad += e > 1e-6;
    }
    Outcome o;
    o.pass = bc_cc_bad == 0 && ec_bad == 0;
    o.detail = "BC/CC: " + std::to_string(100 - bc_cc_bad) + "/100 graphs match path enumeration (max error " +
               fmt("%.1e", bc_err) + " / " + fmt("%.1e", cc_err) + "); EC: " + std::to_string(50 - ec_bad) +
               "/50 within 1e-6 of Jacobi (max " + fmt("%.1e", ec_err) + ")";
    return o;
}

// ---------------------------------------------------------------- 3

Outcome kl_correctness() {
    Rng rng(33);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const double mq = rng.uniform(-2, 2), mp = rng.uniform(-2, 2);
        const double sq = rng.uniform(0.3, 2.0), sp = rng.uniform(0.3, 2.0);
        worst = std::max(worst, std::abs(kl_gaussian(mq, sq * sq, mp, sp * sp) - test::kl_by_integration(mq, sq, mp, sp)));
    }
    const double unit = kl_gaussian(0.0, 1.0, 1.0, 1.0);
    Outcome o;
    o.pass = worst < 1e-6 && std::abs(unit - 0.5) <= 1e-9;
    o.detail = "max |closed form - integration| " + fmt("%.1e", worst) + " over 20 pairs; KL(N(0,1)||N(1,1)) = " +
               fmt("%.12f", unit);
    return o;
}

// ---------------------------------------------------------------- 4

Outcome structural_contracts() {
    const auto t0 = Clock::now();
    std::size_t graphs = 0, violations = 0, chain_errors = 0;
    std::string first;
    for (const auto& [name, dims] : {std::pair{"paper", ModelDims::paper()}, std::pair{"desk", ModelDims::desk()}}) {
        const Resolutions res = dims.resolutions();
        Rng rng(4000 + res.source);
        for (int s = 0; s < 1000; ++s) {
            SgNetParams m = SgNetParams::init(dims, 77 + static_cast<std::uint64_t>(s));
            test::fuzz_parameters(m, rng);
            Matrix source = test::random_graph(res.source, rng, rng.uniform());
            if (s % 50 == 0) source = Matrix(res.source, res.source);
            try {
                Tape t;
                const ForwardContext ctx{s % 2 ? Mode::Train : Mode::Eval, &rng, true, false};
                const AlignOutput al = align_forward(t, t.constant(source), m.aligner, ctx);
                const Var lr = inter_generate(t, al.graph, m.inter, ctx);
                const Var hr = intra_generate(t, lr, m.intra, ctx);
                for (const auto& [g, n] : {std::pair{al.graph.value(), res.source}, std::pair{lr.value(), res.target_lr},
                                           std::pair{hr.value(), res.target_hr}}) {
                    ++graphs;
                    const std::string why = test::graph_contract_violation(g, n);
                    if (!why.empty()) {
                        ++violations;
                        if (first.empty()) first = std::string(name) + " set " + std::to_string(s) + ": " + why;
                    }
                }
            } catch (const Error& e) {
                ++chain_errors;
                if (first.empty()) first = std::string(name) + " set " + std::to_string(s) + ": " + e.what();
            }
        }
    }
    Outcome o;
    o.pass = violations == 0 && chain_errors == 0;
    o.detail = std::to_string(graphs) + " graphs from 2 x 1000 fuzzed parameter sets (35/160/268 and 12/24/36), " +
               std::to_string(violations) + " contract violations, " + std::to_string(chain_errors) +
               " stairway errors, " + fmt("%.1f", seconds_since(t0)) + " s" + (first.empty() ? "" : "; first: " + first);
    return o;
}

// ---------------------------------------------------------------- 5

Outcome loss_semantics() {
    Rng rng(55);
    std::vector<std::string> bad;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) bad.push_back(what);
    };
    const Matrix x = test::random_graph(10, rng), y = test::random_graph(10, rng);
    Tape t;
    {
        const auto l = gtp_loss(t.constant(x), x, t.constant(Matrix::scalar(1.0)), GtpLossWeights{});
        expect(std::abs(l.total.value()[0]) <= 1e-12, "gtp_loss(real, real, D = 1) != 0");
    }
    expect(std::abs(1.0 - pcc(t.constant(x), x).value()[0]) <= 1e-12 && std::abs(1.0 - sgnet::pcc(x, x)) <= 1e-12,
           "pcc loss (X, X) != 0");
    LatentCode code;
    code.mu = t.constant(Matrix::random_normal(10, 4, rng));
    code.logvar = t.constant(Matrix::random_normal(10, 4, rng, 0.3));
    code.z = code.mu;
    const auto prior = LatentPrior::standard_normal(4);
    const Var d = t.constant(Matrix::scalar(0.35));
    expect(alignment_loss(t.constant(x), t.constant(x), code, prior, d, {}).reconstruction == 0.0, "L_rec(X, X) != 0");

    const AlignLossWeights aw;
    const GtpLossWeights gw;
    expect(aw.adversarial == 1.0 && aw.reconstruction == 0.1 && aw.kl == 0.001, "alignment weight defaults");
    expect(gw.adversarial == 1.0 && gw.l1 == 1.0 && gw.pcc == 0.1 && gw.topology == 2.0, "GT-P weight defaults");
    const auto al = alignment_loss(t.constant(x), t.constant(y), code, prior, d, aw);
    const double al_sum = 1.0 * al.adversarial + 0.1 * al.reconstruction + 0.001 * al.kl;
    expect(std::abs(al.total.value()[0] - al_sum) <= 1e-14 * std::abs(al_sum), "L_align != 1 adv + 0.1 rec + 0.001 KL");
    expect(al.adversarial > 0 && al.reconstruction > 0 && al.kl > 0, "alignment terms not all active");
    const auto g = gtp_loss(t.constant(y), x, d, gw);
    const double g_sum = g.adversarial + g.l1 + 0.1 * g.pcc + 2.0 * g.topology;
    expect(std::abs(g.total.value()[0] - g_sum) <= 1e-14 * std::abs(g_sum), "GT-P != adv + L1 + 0.1 PCC + 2 top");
    expect(g.adversarial > 0 && g.l1 > 0 && g.pcc > 0 && g.topology > 0, "GT-P terms not all active");

    const RunConfig defaults;
    expect(defaults.align_weights.reconstruction == 0.1 && defaults.gtp_weights.topology == 2.0,
           "run config does not carry the published weights");
    Outcome o;
    o.pass = bad.empty();
    o.detail = o.pass ? "zero-loss identities hold; (1, 0.1, 0.001) and (1, 1, 0.1, 2) sums reproduced to 1e-14"
                      : "failed: " + bad.front() + (bad.size() > 1 ? " (+" + std::to_string(bad.size() - 1) + " more)" : "");
    return o;
}

// ---------------------------------------------------------------- 6 and 7

struct SeedRuns {
    std::uint64_t seed = 0;
    std::map<Variant, RunResult> by_variant;
};

RunConfig desk_run(const fs::path& out, std::uint64_t seed, Variant v) {
    RunConfig c;
    c.profile = DimsProfile::Desk;
    c.subjects = 30;
    c.epochs = 150;
    c.seed = seed;
    c.variant = v;
    c.out_dir = out;
    return c;
}

std::vector<SeedRuns>& training_runs(const fs::path& work, const std::vector<Variant>& variants) {
    static std::vector<SeedRuns> runs;
    if (runs.empty())
        for (std::uint64_t seed = 0; seed < 3; ++seed) runs.push_back({seed, {}});
    for (SeedRuns& sr : runs)
        for (Variant v : variants) {
            if (sr.by_variant.count(v)) continue;
            const fs::path dir = work / ("seed_" + std::to_string(sr.seed)) / std::string(variant_name(v));
            sr.by_variant[v] = train(desk_run(dir, sr.seed, v));
            std::cerr << "  trained " << variant_name(v) << " seed " << sr.seed << " in "
                      << fmt("%.0f", sr.by_variant[v].seconds) << " s\n";
        }
    return runs;
}

Outcome training_smoke(const fs::path& work) {
    auto& runs = training_runs(work, {Variant::Full});
    bool pass = true;
    std::string detail;
    for (const SeedRuns& sr : runs) {
        const RunResult& r = sr.by_variant.at(Variant::Full);
        std::vector<double> curve(r.folds.front().gtp_curve.size(), 0.0);
        std::string folds;
        for (const FoldResult& f : r.folds) {
            for (std::size_t e = 0; e < curve.size(); ++e) curve[e] += f.gtp_curve[e] / static_cast<double>(r.folds.size());
            const double last = *std::min_element(f.gtp_curve.end() - 10, f.gtp_curve.end());
            folds += (folds.empty() ? "" : ", ") + fmt("%.0f%%", 100.0 * (1.0 - last / f.gtp_curve.front()));
        }
        const double first = curve.front();
        const double last = *std::min_element(curve.end() - 10, curve.end());
        const double drop = 1.0 - last / first;
        const bool ok = drop >= 0.30 && r.seconds < 900.0;
        pass &= ok;
        detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(sr.seed) + ": " +
                  fmt("%.3f", first) + " -> " + fmt("%.3f", last) + " (" + fmt("%.1f%%", 100.0 * drop) +
                  ", folds " + folds + ", " + fmt("%.0f", r.seconds) + " s)";
    }
    return {pass, "fold-mean GT-P, first epoch -> min of last 10 (need >= 30%, < 900 s): " + detail};
}

Outcome ordinal_ablation(const fs::path& work) {
    auto& runs = training_runs(work, {Variant::Full, Variant::StatAlign, Variant::NoAlign, Variant::NoTopology});
    int align_ok = 0, topo_ok = 0;
    std::string detail;
    for (const SeedRuns& sr : runs) {
        const double full = sr.by_variant.at(Variant::Full).mean.hr.mae;
        const double stat = sr.by_variant.at(Variant::StatAlign).mean.hr.mae;
        const double none = sr.by_variant.at(Variant::NoAlign).mean.hr.mae;
        const double ec_full = sr.by_variant.at(Variant::Full).mean.hr.mae_ec;
        const double ec_notop = sr.by_variant.at(Variant::NoTopology).mean.hr.mae_ec;
        const bool a = full < stat && stat < none;
        const bool b = ec_full <= ec_notop;
        align_ok += a;
        topo_ok += b;
        detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(sr.seed) + ": MAE full " +
                  fmt("%.4f", full) + ", stat_align " + fmt("%.4f", stat) + ", no_align " + fmt("%.4f", none) +
                  (a ? " ok" : " out of order") + ", MAE(EC) full " + fmt("%.4f", ec_full) + " vs no_topology " +
                  fmt("%.4f", ec_notop) + (b ? " ok" : " worse");
    }
    Outcome o;
    o.pass = align_ok >= 2 && topo_ok >= 2;
    o.detail = "final-stair test metrics, ordering held in " + std::to_string(align_ok) + "/3 and " +
               std::to_string(topo_ok) + "/3 seeds (need 2/3 each): " + detail;
    return o;
}

// ---------------------------------------------------------------- 8

Outcome determinism_and_resume(const fs::path& work) {
    RunConfig base = desk_run(work / "straight", 11, Variant::Full);
    base.epochs = 6;
    base.checkpoint_every = 3;
    base.align_warmup_epochs = 1;
    const auto t0 = Clock::now();
    train(base);
    RunConfig twin = base;
    twin.out_dir = work / "twin";
    train(twin);
    RunConfig half = base;
    half.out_dir = work / "resumed";
    half.epochs = 3;
    train(half);
    half.epochs = 6;
    TrainOptions opt;
    opt.resume = true;
    train(half, opt);

    int logs_equal = 0, resumed_logs_equal = 0, params_equal = 0;
    for (std::size_t k = 0; k < base.folds; ++k) {
        const std::string f = "fold_" + std::to_string(k);
        const std::string log = slurp(work / "straight" / f / "loss_log.csv");
        logs_equal += log == slurp(work / "twin" / f / "loss_log.csv");
        resumed_logs_equal += log == slurp(work / "resumed" / f / "loss_log.csv");
        TrainingState a = load_checkpoint(work / "straight" / f / "checkpoint_latest.ckpt");
        TrainingState b = load_checkpoint(work / "resumed" / f / "checkpoint_latest.ckpt");
        ParamRefs ra = a.model.all_refs(), rb = b.model.all_refs();
        bool same = ra.params.size() == rb.params.size() && a.rng == b.rng && a.epoch == b.epoch;
        for (std::size_t i = 0; same && i < ra.params.size(); ++i) same = ra.params[i]->value == rb.params[i]->value;
        for (std::size_t i = 0; same && i < ra.buffers.size(); ++i) same = *ra.buffers[i].second == *rb.buffers[i].second;
        params_equal += same;
    }
    const bool metrics_equal = slurp(work / "straight" / "metrics.json") == slurp(work / "twin" / "metrics.json") &&
                               slurp(work / "straight" / "metrics.json") == slurp(work / "resumed" / "metrics.json");
    const int folds = static_cast<int>(base.folds);
    Outcome o;
    o.pass = logs_equal == folds && resumed_logs_equal == folds && params_equal == folds && metrics_equal;
    o.detail = "identical configs: " + std::to_string(logs_equal) + "/" + std::to_string(folds) +
               " loss logs byte-identical; 3 + 3 epochs resumed vs 6 straight: " + std::to_string(resumed_logs_equal) +
               "/" + std::to_string(folds) + " logs and " + std::to_string(params_equal) + "/" + std::to_string(folds) +
               " final models bit-identical, metrics " + (metrics_equal ? "identical" : "differ") + " (" +
               fmt("%.0f", seconds_since(t0)) + " s)";
    return o;
}

// ---------------------------------------------------------------- 9

int shell(const std::string& cmd, const fs::path& log) {
    const int status = std::system((cmd + " >>" + log.string() + " 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_round_trip(const fs::path& work) {
    const auto t0 = Clock::now();
    const std::string cli = SGNET_CLI;
    const std::string w = work.string();
    const fs::path log = work / "cli.log";
    std::ofstream(work / "desk.ini") << "[model]\nprofile = desk\n\n[train]\nepochs = 150\nseed = 0\n";
    std::vector<std::pair<std::string, int>> steps;
    steps.emplace_back("generate", shell(cli + " generate -o " + w + "/data --subjects 30 --seed 1 --profile desk", log));
    steps.emplace_back("train (ablate, 7 variants)",
                       shell(cli + " ablate -c " + w + "/desk.ini -d " + w + "/data -o " + w + "/ablation", log));
    steps.emplace_back("evaluate", shell(cli + " evaluate " + w + "/ablation/full/fold_0/checkpoint_latest.ckpt --test-fold -o " +
                                             w + "/eval.json", log));
    steps.emplace_back("report", shell(cli + " report " + w + "/ablation", log));
    const double secs = seconds_since(t0);

    bool codes = true;
    std::string detail;
    for (const auto& [name, code] : steps) {
        codes &= code == 0;
        detail += (detail.empty() ? "" : ", ") + name + " -> " + std::to_string(code);
    }
    const std::string md = slurp(work / "ablation" / "report" / "report.md");
    std::size_t rows = 0;
    for (Variant v : kAllVariants) {
        const std::string key = "| " + std::string(variant_name(v)) + " |";
        for (std::size_t at = md.find(key); at != std::string::npos; at = md.find(key, at + 1)) ++rows;
    }
    std::size_t heatmaps = 0, top_lists = 0;
    if (fs::exists(work / "ablation" / "report"))
        for (const auto& e : fs::directory_iterator(work / "ablation" / "report")) {
            const std::string name = e.path().filename().string();
            heatmaps += name.starts_with("residual_") && name.ends_with(".png");
            top_lists += name.starts_with("top10_");
        }
    const bool content = rows == 14 && heatmaps >= 1 && top_lists == 3 && md.find("## Top-10 connectivities") != std::string::npos;
    Outcome o;
    o.pass = codes && content && secs < 1200.0;
    o.detail = detail + "; report: " + std::to_string(rows) + " variant rows (7 x 2 stairs), " +
               std::to_string(heatmaps) + " residual heat maps, " + std::to_string(top_lists) + " top-10 lists; " +
               fmt("%.0f", secs) + " s (need < 1200 s)";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> only;
    std::string work_dir = (fs::temp_directory_path() / "sgnet_acceptance").string();
    bool keep = false;
    app.add_option("--only", only, "criteria to run")->delimiter(',')->check(CLI::Range(1, 9));
    app.add_option("--work", work_dir, "scratch directory for training runs");
    app.add_flag("--keep", keep, "leave the scratch directory in place");
    CLI11_PARSE(app, argc, argv);
    const std::set<int> selected = only.empty() ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9}
                                                : std::set<int>(only.begin(), only.end());
    const fs::path work = work_dir;
    fs::remove_all(work);
    fs::create_directories(work);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"gradient integrity", gradient_integrity},
        {"centrality oracles", centrality_oracles},
        {"KL correctness", kl_correctness},
        {"structural contracts", structural_contracts},
        {"loss semantics", loss_semantics},
        {"training smoke", [&] { return training_smoke(work / "runs"); }},
        {"ordinal ablation", [&] { return ordinal_ablation(work / "runs"); }},
        {"determinism and resume", [&] { fs::create_directories(work / "resume"); return determinism_and_resume(work / "resume"); }},
        {"CLI round-trip", [&] { fs::create_directories(work / "cli"); return cli_round_trip(work / "cli"); }},
    };
    int failed = 0, ran = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.count(id)) continue;
        ++ran;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("aborted: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << "  " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << ran - failed << "/" << ran << " criteria passed" << std::endl;
    if (!keep) fs::remove_all(work);
    return failed == 0 ? 0 : 1;
}
