#include "sgnet/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sgnet/dataset_io.hpp"
#include "sgnet/error.hpp"
#include "sgnet/synthetic.hpp"

namespace sgnet {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::size_t total_epochs(const RunConfig& cfg) {
    const bool warm = cfg.gan_config().uses_aligner();
    return (warm ? cfg.align_warmup_epochs : 0) + cfg.epochs;
}

std::size_t warmup_epochs(const RunConfig& cfg) { return total_epochs(cfg) - cfg.epochs; }

void write_text(const fs::path& file, const std::string& text) {
    std::error_code ec;
    if (file.has_parent_path()) fs::create_directories(file.parent_path(), ec);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    out << text;
    if (!out) throw IoError("write failed for " + file.string());
}

std::string read_text(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ordered_json metric_json(const MetricReport& m) {
    return {{"mae", m.mae}, {"mae_bc", m.mae_bc}, {"mae_cc", m.mae_cc}, {"mae_ec", m.mae_ec}, {"kl", m.kl}};
}

ordered_json stair_json(const StairMetrics& s) { return {{"lr", metric_json(s.lr)}, {"hr", metric_json(s.hr)}}; }

std::array<double MetricReport::*, 5> metric_fields() {
    return {&MetricReport::mae, &MetricReport::mae_bc, &MetricReport::mae_cc, &MetricReport::mae_ec,
            &MetricReport::kl};
}

void aggregate(const std::vector<FoldResult>& folds, StairMetrics& mean, StairMetrics& sd) {
    mean = {};
    sd = {};
    if (folds.empty()) return;
    const double n = static_cast<double>(folds.size());
    for (MetricReport StairMetrics::*stair : {&StairMetrics::lr, &StairMetrics::hr}) {
        for (double MetricReport::*f : metric_fields()) {
            double s = 0.0;
            for (const FoldResult& r : folds) s += r.metrics.*stair.*f;
            const double mu = s / n;
            double v = 0.0;
            for (const FoldResult& r : folds) v += (r.metrics.*stair.*f - mu) * (r.metrics.*stair.*f - mu);
            mean.*stair.*f = mu;
            sd.*stair.*f = std::sqrt(v / n);
        }
    }
}

std::string log_header() {
    std::string h = "epoch,phase";
    for (const char* name : StepLog::names()) h += std::string(",") + name;
    return h + "\n";
}

std::string log_row(std::size_t epoch, const std::string& phase,
                    const std::array<double, StepLog::kFields>& v) {
    std::string row = std::to_string(epoch) + "," + phase;
    for (double x : v) row += "," + format_double(x);
    return row + "\n";
}

std::string epoch_file(std::size_t epoch) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "checkpoint_epoch_%04zu.ckpt", epoch);
    return buf;
}

void save_fold_checkpoint(const TrainingState& st, const fs::path& dir) {
    save_checkpoint(st, dir / epoch_file(st.epoch));
    save_checkpoint(st, dir / "checkpoint_latest.ckpt");
}

// Existing log truncated to the first `epochs` rows.
std::string resumed_log(const fs::path& file, std::size_t epochs) {
    std::istringstream in(read_text(file));
    std::string line, out;
    if (!std::getline(in, line) || line + "\n" != log_header())
        throw IoError(file.string() + ": unexpected loss log header");
    out = log_header();
    for (std::size_t i = 0; i < epochs; ++i) {
        if (!std::getline(in, line)) throw IoError(file.string() + ": loss log shorter than the checkpoint");
        out += line + "\n";
    }
    return out;
}

std::vector<double> gtp_from_log(const std::string& log, std::size_t skip) {
    static const std::size_t col = [] {
        const auto& n = StepLog::names();
        return static_cast<std::size_t>(std::find(n.begin(), n.end(), std::string("gtp_total")) - n.begin()) + 2;
    }();
    std::vector<double> out;
    std::istringstream in(log);
    std::string line;
    std::getline(in, line);
    for (std::size_t row = 0; std::getline(in, line); ++row) {
        if (row < skip) continue;
        std::istringstream cells(line);
        std::string cell;
        for (std::size_t c = 0; c <= col && std::getline(cells, cell, ','); ++c) {}
        out.push_back(std::stod(cell));
    }
    return out;
}

}  // namespace

Dataset resolve_dataset(const RunConfig& cfg) {
    const Resolutions want = cfg.dims().resolutions();
    if (!cfg.data_path.empty()) {
        Dataset ds = load_dataset(cfg.data_path);
        const Resolutions got = ds.resolutions();
        if (!(got == want))
            throw ConfigError("dataset " + cfg.data_path.string() + " has resolutions " +
                              std::to_string(got.source) + "/" + std::to_string(got.target_lr) + "/" +
                              std::to_string(got.target_hr) + " but model.profile " +
                              std::string(profile_name(cfg.profile)) + " needs " + std::to_string(want.source) +
                              "/" + std::to_string(want.target_lr) + "/" + std::to_string(want.target_hr));
        if (ds.size() < cfg.folds) throw ConfigError("dataset has fewer subjects than folds");
        return ds;
    }
    SyntheticOptions opt;
    opt.resolutions = want;
    return generate_synthetic_dataset(cfg.subjects, cfg.data_seed, cfg.shift, opt);
}

TrainingState initial_fold_state(const RunConfig& cfg, std::size_t fold, const EdgeStats& stat_target) {
    TrainingState st;
    st.config = cfg;
    st.fold = fold;
    st.epoch = 0;
    st.model = SgNetParams::init(cfg.dims(), mix(cfg.seed, 2 * fold));
    st.rng = Rng(mix(cfg.seed, 2 * fold + 1));
    st.stat_target = stat_target;
    return st;
}

void fit(TrainingState& state, const DatasetView& view, const std::vector<std::string>& train_ids,
         const std::function<void(const TrainingState&, const std::string& phase,
                                  const std::array<double, StepLog::kFields>&)>& on_epoch) {
    if (train_ids.empty()) throw ContractError("fit: empty training fold");
    const RunConfig& cfg = state.config;
    const std::size_t total = total_epochs(cfg);
    const std::size_t warm = warmup_epochs(cfg);
    GanConfig gc = cfg.gan_config();
    gc.stat_target = state.stat_target;

    std::vector<std::size_t> order(train_ids.size());
    std::vector<const SubjectTriple*> batch;
    while (state.epoch < total) {
        gc.aligner_only = state.epoch < warm;
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[state.rng.uniform_index(i)]);

        std::array<double, StepLog::kFields> sum{};
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batches) {
            batch.clear();
            for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i)
                batch.push_back(&view.get(train_ids[order[i]]));
            StepLog log;
            try {
                log = gan_step(batch, state.model, state.optimizers, gc, state.rng);
            } catch (const NumericError& e) {
                throw NumericError("fold " + std::to_string(state.fold) + ", epoch " +
                                   std::to_string(state.epoch + 1) + ", batch " + std::to_string(batches + 1) +
                                   ": " + e.what());
            }
            const auto v = log.values();
            for (std::size_t f = 0; f < v.size(); ++f) sum[f] += v[f];
        }
        for (double& x : sum) x /= static_cast<double>(batches);
        ++state.epoch;
        on_epoch(state, gc.aligner_only ? "warmup" : "joint", sum);
    }
}

PredictionSet predict_subjects(TrainingState& state, const Dataset& ds, const std::vector<std::string>& ids) {
    GanConfig gc = state.config.gan_config();
    gc.stat_target = state.stat_target;
    PredictionSet p;
    for (const std::string& id : ids) {
        const SubjectTriple& s = ds.find(id);
        Prediction pr = predict(state.model, s.source.adjacency(), gc);
        p.ids.push_back(id);
        p.lr.push_back(std::move(pr.target_lr));
        p.hr.push_back(std::move(pr.target_hr));
        p.real_lr.push_back(s.target_lr.adjacency());
        p.real_hr.push_back(s.target_hr.adjacency());
    }
    return p;
}

StairMetrics score(const PredictionSet& p) {
    if (p.ids.empty()) throw ContractError("score: no predictions");
    return {evaluate_metrics(p.lr, p.real_lr), evaluate_metrics(p.hr, p.real_hr)};
}

RunResult train(const RunConfig& cfg, const TrainOptions& options) {
    cfg.validate();
    return train(cfg, resolve_dataset(cfg), options);
}

RunResult train(const RunConfig& cfg, const Dataset& ds, const TrainOptions& options) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path out = cfg.out_dir;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create run directory " + out.string() + ": " + ec.message());
    write_text(out / "config.ini", to_ini(cfg));

    const FoldSplit split = kfold_split(ds, cfg.folds, cfg.seed);
    RunResult result;
    result.variant = cfg.variant;
    ordered_json folds_json = ordered_json::array();
    for (std::size_t k = 0; k < split.folds.size(); ++k) {
        const Fold& fold = split.folds[k];
        const fs::path dir = out / ("fold_" + std::to_string(k));
        fs::create_directories(dir / "predictions", ec);
        if (ec) throw IoError("cannot create " + (dir / "predictions").string() + ": " + ec.message());

        const DatasetView view(ds, [&](const std::string& id) {
            if (options.on_train_read) options.on_train_read(k, id);
        });
        std::vector<Matrix> targets;
        for (const std::string& id : fold.train_ids) targets.push_back(view.get(id).target_lr.adjacency());
        const EdgeStats stat_target = pooled_edge_stats(targets);

        TrainingState state;
        std::string log;
        const fs::path latest = dir / "checkpoint_latest.ckpt";
        if (options.resume && fs::exists(latest)) {
            state = load_checkpoint(latest);
            if (training_hash(state.config) != training_hash(cfg))
                throw ConfigError(latest.string() + " was written by a different configuration");
            if (state.fold != k) throw ConfigError(latest.string() + " belongs to fold " + std::to_string(state.fold));
            if (state.epoch > total_epochs(cfg))
                throw ConfigError(latest.string() + " is past the configured number of epochs");
            state.config = cfg;
            log = resumed_log(dir / "loss_log.csv", state.epoch);
        } else {
            state = initial_fold_state(cfg, k, stat_target);
            log = log_header();
            save_fold_checkpoint(state, dir);
        }
        write_text(dir / "loss_log.csv", log);

        const std::size_t total = total_epochs(cfg);
        std::ofstream log_file(dir / "loss_log.csv", std::ios::binary | std::ios::app);
        if (!log_file) throw IoError("cannot append to " + (dir / "loss_log.csv").string());
        fit(state, view, fold.train_ids,
            [&](const TrainingState& st, const std::string& phase, const std::array<double, StepLog::kFields>& v) {
                const std::string row = log_row(st.epoch, phase, v);
                log += row;
                log_file << row;
                log_file.flush();
                if (st.epoch % cfg.checkpoint_every == 0 || st.epoch == total) save_fold_checkpoint(st, dir);
                if (options.progress && (st.epoch % 10 == 0 || st.epoch == total))
                    *options.progress << variant_name(cfg.variant) << " fold " << k << " epoch " << st.epoch << "/"
                                      << total << " gtp " << format_double(v[14]) << "\n";
            });
        if (!log_file) throw IoError("write failed for " + (dir / "loss_log.csv").string());

        const PredictionSet preds = predict_subjects(state, ds, fold.test_ids);
        for (std::size_t i = 0; i < preds.ids.size(); ++i) {
            write_matrix_csv(preds.lr[i], dir / "predictions" / (preds.ids[i] + "_lr.csv"));
            write_matrix_csv(preds.hr[i], dir / "predictions" / (preds.ids[i] + "_hr.csv"));
        }
        FoldResult fr;
        fr.fold = k;
        fr.test_ids = fold.test_ids;
        fr.metrics = score(preds);
        fr.gtp_curve = gtp_from_log(log, warmup_epochs(cfg));
        ordered_json fj = {{"fold", k}, {"epochs", state.epoch}, {"test_ids", fold.test_ids}};
        fj.update(stair_json(fr.metrics));
        write_text(dir / "metrics.json", fj.dump(2) + "\n");
        folds_json.push_back(fj);
        result.folds.push_back(std::move(fr));
    }
    aggregate(result.folds, result.mean, result.std);

    ordered_json run = {{"variant", variant_name(cfg.variant)},
                        {"profile", profile_name(cfg.profile)},
                        {"seed", cfg.seed},
                        {"epochs", cfg.epochs},
                        {"folds", folds_json},
                        {"mean", stair_json(result.mean)},
                        {"std", stair_json(result.std)}};
    write_text(out / "metrics.json", run.dump(2) + "\n");
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::vector<RunResult> run_ablation(const RunConfig& base, const TrainOptions& options) {
    base.validate();
    const Dataset ds = resolve_dataset(base);
    const fs::path out = base.out_dir;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create run directory " + out.string() + ": " + ec.message());
    write_text(out / "config.ini", to_ini(base));

    std::vector<RunResult> results;
    ordered_json rows = ordered_json::array();
    for (Variant v : kAllVariants) {
        RunConfig cfg = base;
        cfg.variant = v;
        cfg.out_dir = out / std::string(variant_name(v));
        results.push_back(train(cfg, ds, options));
        const RunResult& r = results.back();
        for (const char* stair : {"lr", "hr"}) {
            const bool lr = std::string(stair) == "lr";
            rows.push_back({{"variant", variant_name(v)},
                            {"stair", stair},
                            {"mean", metric_json(lr ? r.mean.lr : r.mean.hr)},
                            {"std", metric_json(lr ? r.std.lr : r.std.hr)}});
        }
    }
    const ordered_json doc = {{"seed", base.seed}, {"profile", profile_name(base.profile)},
                              {"epochs", base.epochs}, {"folds", base.folds}, {"rows", rows}};
    write_text(out / "ablation.json", doc.dump(2) + "\n");
    return results;
}

Residual residual_matrix(const Matrix& pred, const Matrix& real) {
    if (pred.rows() != pred.cols() || !pred.same_shape(real))
        throw ContractError("residual_matrix: prediction " + pred.shape_str() + " and ground truth " +
                            real.shape_str() + " differ in resolution");
    Residual r;
    r.matrix = Matrix(pred.rows(), pred.cols());
    for (std::size_t i = 0; i < pred.rows(); ++i)
        for (std::size_t j = 0; j < pred.cols(); ++j) r.matrix(i, j) = std::abs(pred(i, j) - real(i, j));
    r.mean = mean_offdiag_abs_diff(pred, real);
    return r;
}

std::vector<Connection> top_k_connectivities(const Matrix& g, std::size_t k) {
    if (g.rows() != g.cols()) throw ContractError("top_k_connectivities: graph must be square, got " + g.shape_str());
    const std::size_t n = g.rows();
    const std::size_t edges = n < 2 ? 0 : n * (n - 1) / 2;
    if (k > edges)
        throw ContractError("top_k_connectivities: k = " + std::to_string(k) + " exceeds the " +
                            std::to_string(edges) + " edges of a " + std::to_string(n) + "-node graph");
    std::vector<Connection> all;
    all.reserve(edges);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) all.push_back({i, j, g(i, j)});
    auto before = [](const Connection& a, const Connection& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), before);
    all.resize(k);
    return all;
}

}  // namespace sgnet
