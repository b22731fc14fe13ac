#include "sgnet/synthgan.hpp"


#include "sgnet/error.hpp"
#include "sgnet/rng.hpp"

namespace sgnet {

ModelDims ModelDims::paper() { return {}; }

ModelDims ModelDims::desk() {
    ModelDims d;
    d.aligner = AlignerDims::desk(12);
    d.inter = {12, 16, 20, 24, 8};
    d.intra = {24, 30, 36, 36, 8};
    return d;
}

namespace {

void require_nodes(const Var& g, std::size_t n, const char* what) {
    validate_adjacency(g.value(), what);
    if (g.rows() != n)
        throw ContractError(std::string(what) + ": expected " + std::to_string(n) +
                            " nodes, got " + std::to_string(g.rows()));
}

NormDropConfig final_norm(const std::string& name, std::size_t features) {
    auto cfg = NormDropConfig::init(name, features);
    cfg.dropout_rate = 0.0;
    return cfg;
}

}  // namespace

InterGanParams InterGanParams::init(const InterDims& d, Rng& rng) {
    InterGanParams p;
    p.dims = d;
    p.g1 = EdgeGcnLayer::init("inter.g1", d.nodes_in, d.hidden1, rng);
    p.g2 = EdgeGcnLayer::init("inter.g2", d.hidden1, d.hidden2, rng);
    p.g3 = EdgeGcnLayer::init("inter.g3", d.hidden2, d.nodes_out, rng);
    p.bn1 = NormDropConfig::init("inter.bn1", d.hidden1);
    p.bn2 = NormDropConfig::init("inter.bn2", d.hidden2);
    p.bn3 = final_norm("inter.bn3", d.nodes_out);
    p.skip = Dense::init("inter.skip", d.hidden1, d.hidden2, rng);
    p.d1 = EdgeGcnLayer::init("inter_disc.d1", d.nodes_out, d.disc_hidden, rng);
    p.d2 = EdgeGcnLayer::init("inter_disc.d2", d.disc_hidden, 1, rng);
    return p;
}

void InterGanParams::collect_generator(ParamRefs& refs) {
    g1.collect(refs);
    bn1.collect(refs);
    g2.collect(refs);
    bn2.collect(refs);
    skip.collect(refs);
    g3.collect(refs);
    bn3.collect(refs);
}

void InterGanParams::collect_discriminator(ParamRefs& refs) {
    d1.collect(refs);
    d2.collect(refs);
}

IntraGanParams IntraGanParams::init(const IntraDims& d, Rng& rng) {
    IntraGanParams p;
    p.dims = d;
    p.g1 = NodeGcnLayer::init("intra.g1", d.nodes_in, d.hidden1, rng);
    p.g2 = NodeGcnLayer::init("intra.g2", d.hidden1, d.hidden2, rng);
    p.g3 = NodeGcnLayer::init("intra.g3", d.hidden2, d.nodes_out, rng);
    p.bn1 = NormDropConfig::init("intra.bn1", d.hidden1);
    p.bn2 = NormDropConfig::init("intra.bn2", d.hidden2);
    p.bn3 = final_norm("intra.bn3", d.nodes_out);
    p.skip = Dense::init("intra.skip", d.hidden1, d.hidden2, rng);
    p.d1 = NodeGcnLayer::init("intra_disc.d1", d.nodes_out, d.disc_hidden, rng);
    p.d2 = NodeGcnLayer::init("intra_disc.d2", d.disc_hidden, 1, rng);
    return p;
}

void IntraGanParams::collect_generator(ParamRefs& refs) {
    g1.collect(refs);
    bn1.collect(refs);
    g2.collect(refs);
    bn2.collect(refs);
    skip.collect(refs);
    g3.collect(refs);
    bn3.collect(refs);
}

void IntraGanParams::collect_discriminator(ParamRefs& refs) {
    d1.collect(refs);
    d2.collect(refs);
}

Var inter_generate(Tape& t, Var graph, InterGanParams& p, const ForwardContext& ctx) {
    require_nodes(graph, p.dims.nodes_in, "inter_generate input");
    const Var x0 = initial_features(graph);
    const Var h1 = tanh(norm_drop(t, edge_gcn_forward(t, x0, graph, p.g1, ctx), p.bn1, ctx));
    const Var h2 = tanh(norm_drop(t, edge_gcn_forward(t, h1, graph, p.g2, ctx), p.bn2, ctx));
    const Var in3 = h2 + p.skip.forward(t, h1, ctx);
    return resolution_map(norm_drop(t, edge_gcn_forward(t, in3, graph, p.g3, ctx), p.bn3, ctx));
}

Var intra_generate(Tape& t, Var graph, IntraGanParams& p, const ForwardContext& ctx) {
    require_nodes(graph, p.dims.nodes_in, "intra_generate input");
    const Var x0 = initial_features(graph);
    const Var h1 = tanh(norm_drop(t, node_gcn_forward(t, x0, graph, p.g1, ctx), p.bn1, ctx));
    const Var h2 = tanh(norm_drop(t, node_gcn_forward(t, h1, graph, p.g2, ctx), p.bn2, ctx));
    const Var in3 = h2 + p.skip.forward(t, h1, ctx);
    return resolution_map(norm_drop(t, node_gcn_forward(t, in3, graph, p.g3, ctx), p.bn3, ctx));
}

Var discriminate(Tape& t, Var graph, InterGanParams& p, const ForwardContext& ctx) {
    require_nodes(graph, p.dims.nodes_out, "inter discriminator input");
    const Var h = leaky_relu(edge_gcn_forward(t, initial_features(graph), graph, p.d1, ctx));
    return sigmoid(mean_pool(edge_gcn_forward(t, h, graph, p.d2, ctx)));
}

Var discriminate(Tape& t, Var graph, IntraGanParams& p, const ForwardContext& ctx) {
    require_nodes(graph, p.dims.nodes_out, "intra discriminator input");
    const Var h = leaky_relu(node_gcn_forward(t, initial_features(graph), graph, p.d1, ctx));
    return sigmoid(mean_pool(node_gcn_forward(t, h, graph, p.d2, ctx)));
}

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoAlign: return "no_align";
        case Variant::StatAlign: return "stat_align";
        case Variant::VgaeAlign: return "vgae_align";
        case Variant::ArgaAlign: return "arga_align";
        case Variant::NoPcc: return "no_pcc";
        case Variant::NoTopology: return "no_topology";
    }
    return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
    for (Variant v : kAllVariants)
        if (variant_name(v) == name) return v;
    return std::nullopt;
}

AlignLossWeights GanConfig::effective_align_weights() const {
    AlignLossWeights w = align_weights;
    if (variant == Variant::VgaeAlign) w.adversarial = 0.0;
    return w;
}

GtpLossWeights GanConfig::effective_gtp_weights() const {
    GtpLossWeights w = gtp_weights;
    if (variant == Variant::NoPcc) w.pcc = 0.0;
    if (variant == Variant::NoTopology) w.topology = 0.0;
    return w;
}

bool GanConfig::uses_aligner() const {
    return variant != Variant::NoAlign && variant != Variant::StatAlign;
}

bool GanConfig::uses_latent_discriminator() const {
    return uses_aligner() && variant != Variant::VgaeAlign;
}

SgNetParams SgNetParams::init(const ModelDims& dims, std::uint64_t seed) {
    if (dims.inter.nodes_in != dims.aligner.nodes || dims.intra.nodes_in != dims.inter.nodes_out)
        throw ContractError("SgNetParams: stair resolutions do not chain");
    Rng rng(seed);
    SgNetParams m;
    m.dims = dims;
    m.aligner = AlignerParams::init(dims.aligner, rng);
    m.inter = InterGanParams::init(dims.inter, rng);
    m.intra = IntraGanParams::init(dims.intra, rng);
    m.projection = lift_projection(dims.aligner.latent, rng.next_u64());
    // Per-graph statistics in eval mode too: the running averages of a
    // 20-subject fold track the drifting weights poorly.
    for (NormDropConfig* bn : {&m.aligner.bn1, &m.aligner.bn2, &m.inter.bn1, &m.inter.bn2,
                               &m.inter.bn3, &m.intra.bn1, &m.intra.bn2, &m.intra.bn3})
        bn->eval_input_stats = true;
    return m;
}

ParamRefs SgNetParams::generator_refs() {
    ParamRefs r;
    aligner.collect_generator(r);
    inter.collect_generator(r);
    intra.collect_generator(r);
    return r;
}

ParamRefs SgNetParams::discriminator_refs() {
    ParamRefs r;
    aligner.collect_discriminator(r);
    inter.collect_discriminator(r);
    intra.collect_discriminator(r);
    return r;
}

ParamRefs SgNetParams::all_refs() {
    ParamRefs r = generator_refs();
    r.append(discriminator_refs());
    return r;
}

namespace {

Var stage_input(Tape& t, Var source, SgNetParams& model, const GanConfig& cfg,
                const ForwardContext& ctx, std::optional<AlignOutput>& aligned) {
    switch (cfg.variant) {
        case Variant::NoAlign: return source;
        case Variant::StatAlign:
            return t.constant(
                statistical_align(source.value(), cfg.stat_target.mean, cfg.stat_target.std));
        default:
            aligned = align_forward(t, source, model.aligner, ctx, cfg.variant != Variant::ArgaAlign);
            return aligned->graph;
    }
}

template <class F>
auto named(const char* component, F&& f) {
    try {
        return f();
    } catch (const NumericError& e) {
        throw NumericError(std::string("gan_step: ") + component + ": " + e.what());
    }
}

}  // namespace

Prediction predict(SgNetParams& model, const Matrix& source, const GanConfig& cfg) {
    Tape t;
    const ForwardContext ctx{Mode::Eval, nullptr, false, false};
    std::optional<AlignOutput> al;
    const Var in = stage_input(t, t.constant(source), model, cfg, ctx, al);
    const Var lr = inter_generate(t, in, model.inter, ctx);
    const Var hr = intra_generate(t, lr, model.intra, ctx);
    return {in.value(), lr.value(), hr.value()};
}

const std::array<const char*, StepLog::kFields>& StepLog::names() {
    static const std::array<const char*, kFields> n = {
        "align_adv", "align_rec", "align_kl",  "align_total", "inter_adv", "inter_l1", "inter_pcc",
        "inter_top", "inter_total", "intra_adv", "intra_l1", "intra_pcc", "intra_top",
        "intra_total", "gtp_total", "generator_total", "d_align", "d_inter", "d_intra"};
    return n;
}

std::array<double, StepLog::kFields> StepLog::values() const {
    return {align_adv, align_rec, align_kl,    align_total, inter_adv,      inter_l1, inter_pcc,
            inter_top, inter_total, intra_adv, intra_l1,    intra_pcc,      intra_top, intra_total,
            gtp_total, generator_total, d_align, d_inter,   d_intra};
}

StepLog gan_step(std::span<const SubjectTriple* const> batch, SgNetParams& model, Optimizers& opt,
                 const GanConfig& cfg, Rng& rng) {
    if (batch.empty()) throw ContractError("gan_step: empty batch");
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    const bool stairs = !cfg.aligner_only;
    if (cfg.aligner_only && !cfg.uses_aligner())
        throw ContractError("gan_step: aligner warm start requested for a variant without aligner");
    const AlignLossWeights aw = cfg.effective_align_weights();
    const GtpLossWeights gw = cfg.effective_gtp_weights();

    std::vector<Matrix> lr_targets;
    for (const SubjectTriple* s : batch) lr_targets.push_back(s->target_lr.adjacency());
    const LatentPrior prior =
        cfg.prior == PriorKind::Lifted
            ? LatentPrior::lifted(lr_targets, model.projection, cfg.prior_variance_floor)
            : LatentPrior::standard_normal(model.dims.aligner.latent);

    // Every subject's generator forward shares one tape, kept alive for the
    // generator phase.
    Tape gt;
    const std::size_t nb = batch.size();
    std::vector<Var> sources, lr(nb), hr(nb);
    std::vector<std::optional<AlignOutput>> aligned(nb);
    const ForwardContext gen_ctx{Mode::Train, &rng, true, true};
    for (std::size_t i = 0; i < nb; ++i) {
        const SubjectTriple& s = *batch[i];
        sources.push_back(gt.constant(s.source.adjacency()));
        const Var in = named("aligner", [&] {
            return stage_input(gt, sources[i], model, cfg, gen_ctx, aligned[i]);
        });
        if (!stairs) continue;
        lr[i] = named("inter generator", [&] { return inter_generate(gt, in, model.inter, gen_ctx); });
        const Var intra_in = cfg.teacher_forcing ? gt.constant(s.target_lr.adjacency()) : lr[i];
        hr[i] = named("intra generator", [&] { return intra_generate(gt, intra_in, model.intra, gen_ctx); });
    }

    StepLog log;
    const ForwardContext disc_ctx{Mode::Train, &rng, true, false};
    ParamRefs d_refs;
    if (cfg.uses_latent_discriminator()) model.aligner.collect_discriminator(d_refs);
    if (stairs) {
        model.inter.collect_discriminator(d_refs);
        model.intra.collect_discriminator(d_refs);
    }
    for (Parameter* p : d_refs.params) p->zero_grad();
    for (std::size_t i = 0; i < nb; ++i) {
        const SubjectTriple& s = *batch[i];
        Tape t;
        std::vector<Var> terms;
        if (cfg.uses_latent_discriminator()) {
            const Var real = latent_discriminate(
                t, t.constant(prior.sample(model.dims.aligner.nodes, rng)), model.aligner, disc_ctx);
            const Var fake = latent_discriminate(t, t.constant(aligned[i]->code.z.value()), model.aligner,
                                                 disc_ctx);
            const Var l = named("D_align loss", [&] { return discriminator_loss(real, fake); });
            log.d_align += l.value()[0] * inv_b;
            terms.push_back(l);
        }
        if (stairs) {
            const Var ri = discriminate(t, t.constant(s.target_lr.adjacency()), model.inter, disc_ctx);
            const Var fi = discriminate(t, t.constant(lr[i].value()), model.inter, disc_ctx);
            const Var li = named("D_inter loss", [&] { return discriminator_loss(ri, fi); });
            log.d_inter += li.value()[0] * inv_b;
            terms.push_back(li);
            const Var rh = discriminate(t, t.constant(s.target_hr.adjacency()), model.intra, disc_ctx);
            const Var fh = discriminate(t, t.constant(hr[i].value()), model.intra, disc_ctx);
            const Var lh = named("D_intra loss", [&] { return discriminator_loss(rh, fh); });
            log.d_intra += lh.value()[0] * inv_b;
            terms.push_back(lh);
        }
        if (terms.empty()) continue;
        Var total = terms.front();
        for (std::size_t k = 1; k < terms.size(); ++k) total = total + terms[k];
        t.backward(total);
        t.accumulate_param_grads(inv_b);
    }
    if (!d_refs.params.empty())
        (stairs ? opt.discriminator : opt.warmup_discriminator)
            .update_from_accumulated(d_refs.params, cfg.lr_d);

    ParamRefs g_refs;
    if (cfg.uses_aligner()) model.aligner.collect_generator(g_refs);
    if (stairs) {
        model.inter.collect_generator(g_refs);
        model.intra.collect_generator(g_refs);
    }
    for (Parameter* p : g_refs.params) p->zero_grad();
    const ForwardContext frozen{Mode::Train, &rng, false, false};
    const Var one = gt.constant(Matrix::scalar(1.0));
    std::vector<Var> terms;
    for (std::size_t i = 0; i < nb; ++i) {
        const SubjectTriple& s = *batch[i];
        if (aligned[i]) {
            const AlignOutput& al = *aligned[i];
            const Var d = aw.adversarial != 0.0
                              ? latent_discriminate(gt, al.code.z, model.aligner, frozen)
                              : one;
            const AlignLoss la = named("alignment loss", [&] {
                return alignment_loss(sources[i], al.graph, al.code, prior, d, aw);
            });
            log.align_adv += la.adversarial * inv_b;
            log.align_rec += la.reconstruction * inv_b;
            log.align_kl += la.kl * inv_b;
            log.align_total += la.total.value()[0] * inv_b;
            terms.push_back(la.total);
        }
        if (stairs) {
            const Var di = gw.adversarial != 0.0 ? discriminate(gt, lr[i], model.inter, frozen) : one;
            const GtpLoss gi = named("GT-P loss (inter)", [&] {
                return gtp_loss(lr[i], s.target_lr.adjacency(), di, gw, cfg.ec_iterations);
            });
            const Var dh = gw.adversarial != 0.0 ? discriminate(gt, hr[i], model.intra, frozen) : one;
            const GtpLoss gh = named("GT-P loss (intra)", [&] {
                return gtp_loss(hr[i], s.target_hr.adjacency(), dh, gw, cfg.ec_iterations);
            });
            log.inter_adv += gi.adversarial * inv_b;
            log.inter_l1 += gi.l1 * inv_b;
            log.inter_pcc += gi.pcc * inv_b;
            log.inter_top += gi.topology * inv_b;
            log.inter_total += gi.total.value()[0] * inv_b;
            log.intra_adv += gh.adversarial * inv_b;
            log.intra_l1 += gh.l1 * inv_b;
            log.intra_pcc += gh.pcc * inv_b;
            log.intra_top += gh.topology * inv_b;
            log.intra_total += gh.total.value()[0] * inv_b;
            terms.push_back(gi.total);
            terms.push_back(gh.total);
        }
    }
    if (!terms.empty()) {
        Var total = terms.front();
        for (std::size_t k = 1; k < terms.size(); ++k) total = total + terms[k];
        total = scale(total, inv_b);
        log.generator_total = total.value()[0];
        named("generator backward", [&] {
            gt.backward(total);
            return 0;
        });
        gt.accumulate_param_grads(1.0);
    }
    log.gtp_total = log.inter_total + log.intra_total;
    if (!g_refs.params.empty())
        (stairs ? opt.generator : opt.warmup_generator).update_from_accumulated(g_refs.params, cfg.lr_g);
    return log;
}

}  // namespace sgnet
