// sgnet command line: generate, train, ablate, evaluate, report.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric abort, 4 I/O error,
// 1 anything else.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgnet/checkpoint.hpp"
#include "sgnet/dataset_io.hpp"
#include "sgnet/error.hpp"
#include "sgnet/pipeline.hpp"
#include "sgnet/report.hpp"
#include "sgnet/synthetic.hpp"

using namespace sgnet;
namespace fs = std::filesystem;

namespace {

// Command-line settings applied on top of the config file and environment.
struct Overrides {
    std::string config;
    std::optional<std::string> out_dir, data, variant, profile;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs, folds, subjects;
    bool resume = false;
    bool quiet = false;
};

void add_run_options(CLI::App* cmd, Overrides& o, bool with_variant) {
    cmd->add_option("-c,--config", o.config, "INI run configuration");
    cmd->add_option("-o,--out-dir", o.out_dir, "run directory");
    cmd->add_option("-d,--data", o.data, "dataset directory written by `generate`");
    cmd->add_option("--seed", o.seed, "training seed");
    cmd->add_option("--epochs", o.epochs, "joint training epochs");
    cmd->add_option("--folds", o.folds, "cross-validation folds");
    cmd->add_option("--subjects", o.subjects, "synthetic cohort size when no dataset is given");
    cmd->add_option("--profile", o.profile, "paper or desk");
    if (with_variant) cmd->add_option("--variant", o.variant, "full, no_align, stat_align, vgae_align, arga_align, no_pcc or no_topology");
    cmd->add_flag("--resume", o.resume, "continue each fold from its latest checkpoint");
    cmd->add_flag("-q,--quiet", o.quiet, "no progress output");
}

RunConfig resolve_config(const Overrides& o) {
    RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
    apply_env_overrides(c);
    if (o.out_dir) c.out_dir = *o.out_dir;
    if (o.data) c.data_path = fs::absolute(*o.data);
    if (o.seed) c.seed = *o.seed;
    if (o.epochs) c.epochs = *o.epochs;
    if (o.folds) c.folds = *o.folds;
    if (o.subjects) c.subjects = *o.subjects;
    if (o.profile) {
        if (*o.profile == "paper") c.profile = DimsProfile::Paper;
        else if (*o.profile == "desk") c.profile = DimsProfile::Desk;
        else throw ConfigError("--profile: expected paper or desk, got '" + *o.profile + "'");
    }
    if (o.variant) {
        const auto v = parse_variant(*o.variant);
        if (!v) throw ConfigError("--variant: unknown variant '" + *o.variant + "'");
        c.variant = *v;
    }
    c.validate();
    return c;
}

nlohmann::ordered_json metric_json(const MetricReport& m) {
    return {{"mae", m.mae}, {"mae_bc", m.mae_bc}, {"mae_cc", m.mae_cc}, {"mae_ec", m.mae_ec}, {"kl", m.kl}};
}

void print_summary(const RunResult& r) {
    std::cout << variant_name(r.variant) << ": test MAE lr " << format_double(r.mean.lr.mae) << " hr "
              << format_double(r.mean.hr.mae) << " (" << r.folds.size() << " folds, " << r.seconds << " s)\n";
}

int run(int argc, char** argv) {
    CLI::App app{"Cross-modality brain graph synthesis: data generation, training, ablation, evaluation, reports"};
    app.require_subcommand(1);

    struct {
        std::string out;
        std::string config;
        std::size_t subjects = 30;
        std::uint64_t seed = 1;
        std::string profile = "desk";
        std::optional<double> shift_mean, shift_std;
    } gen;
    auto* generate = app.add_subcommand("generate", "write a synthetic cohort to a dataset directory");
    generate->add_option("-o,--out", gen.out, "dataset directory")->required();
    generate->add_option("-c,--config", gen.config, "take [data] and model.profile from this INI file")
        ->check(CLI::ExistingFile);
    generate->add_option("--subjects", gen.subjects, "cohort size");
    generate->add_option("--seed", gen.seed, "data seed");
    generate->add_option("--profile", gen.profile, "paper (35/160/268) or desk (12/24/36)");
    generate->add_option("--shift-mean", gen.shift_mean, "target edge-weight mean offset");
    generate->add_option("--shift-std", gen.shift_std, "target edge-weight std offset");

    Overrides tr;
    auto* train_cmd = app.add_subcommand("train", "train every fold and evaluate on its test subjects");
    add_run_options(train_cmd, tr, true);

    Overrides ab;
    auto* ablate = app.add_subcommand("ablate", "train all seven variants on the same folds");
    add_run_options(ablate, ab, false);

    struct {
        std::string checkpoint, data, out;
        bool test_fold = false;
    } ev;
    auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a dataset");
    evaluate->add_option("checkpoint", ev.checkpoint, "checkpoint file")->required();
    evaluate->add_option("-d,--data", ev.data, "dataset directory (default: the checkpoint's own data)");
    evaluate->add_flag("--test-fold", ev.test_fold, "only the checkpoint fold's test subjects");
    evaluate->add_option("-o,--out", ev.out, "write metrics JSON here");

    std::string run_dir;
    auto* report = app.add_subcommand("report", "summarise a run or ablation directory");
    report->add_option("run_dir", run_dir, "directory written by train or ablate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*generate) {
        RunConfig c;
        if (!gen.config.empty()) c = load_run_config(gen.config);
        if (gen.config.empty() || generate->count("--subjects")) c.subjects = gen.subjects;
        if (gen.config.empty() || generate->count("--seed")) c.data_seed = gen.seed;
        if (gen.config.empty() || generate->count("--profile")) {
            if (gen.profile == "paper") c.profile = DimsProfile::Paper;
            else if (gen.profile == "desk") c.profile = DimsProfile::Desk;
            else throw ConfigError("--profile: expected paper or desk, got '" + gen.profile + "'");
        }
        if (gen.shift_mean) c.shift.mean = *gen.shift_mean;
        if (gen.shift_std) c.shift.std = *gen.shift_std;
        if (c.subjects == 0) throw ConfigError("--subjects must be > 0");
        c.data_path.clear();
        const Dataset ds = resolve_dataset(c);
        save_dataset(ds, gen.out);
        std::cout << "wrote " << ds.size() << " subjects to " << gen.out << "\n";
        return 0;
    }

    if (*train_cmd) {
        const RunConfig c = resolve_config(tr);
        TrainOptions opt;
        opt.resume = tr.resume;
        if (!tr.quiet) opt.progress = &std::cerr;
        print_summary(train(c, opt));
        std::cout << "run directory: " << c.out_dir.string() << "\n";
        return 0;
    }

    if (*ablate) {
        const RunConfig c = resolve_config(ab);
        TrainOptions opt;
        opt.resume = ab.resume;
        if (!ab.quiet) opt.progress = &std::cerr;
        for (const RunResult& r : run_ablation(c, opt)) print_summary(r);
        std::cout << "ablation directory: " << c.out_dir.string() << "\n";
        return 0;
    }

    if (*evaluate) {
        TrainingState st = load_checkpoint(ev.checkpoint);
        RunConfig data_cfg = st.config;
        if (!ev.data.empty()) data_cfg.data_path = ev.data;
        const Dataset ds = resolve_dataset(data_cfg);
        std::vector<std::string> ids = ds.ids();
        if (ev.test_fold) {
            const FoldSplit split = kfold_split(ds, st.config.folds, st.config.seed);
            ids = split.folds.at(st.fold).test_ids;
        }
        const StairMetrics m = score(predict_subjects(st, ds, ids));
        const nlohmann::ordered_json doc = {{"checkpoint", ev.checkpoint},
                                            {"fold", st.fold},
                                            {"epoch", st.epoch},
                                            {"subjects", ids.size()},
                                            {"lr", metric_json(m.lr)},
                                            {"hr", metric_json(m.hr)}};
        if (!ev.out.empty()) {
            std::ofstream out(ev.out, std::ios::binary | std::ios::trunc);
            if (!(out << doc.dump(2) << "\n")) throw IoError("cannot write " + ev.out);
        }
        std::cout << doc.dump(2) << "\n";
        return 0;
    }

    if (*report) {
        write_report(run_dir);
        std::cout << "wrote " << (fs::path(run_dir) / "report" / "report.md").string() << "\n";
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ContractError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const ParseError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
