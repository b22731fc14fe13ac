#include "sgnet/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "sgnet/dataset_io.hpp"
#include "sgnet/error.hpp"
#include "sgnet/pipeline.hpp"
#include "sgnet/render.hpp"
#include "sgnet/rng.hpp"

namespace sgnet {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kTopK = 10;
constexpr std::size_t kTopSubjects = 3;

std::string read_text(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    out << text;
    if (!out) throw IoError("write failed for " + file.string());
}

json read_json(const fs::path& file) {
    try {
        return json::parse(read_text(file));
    } catch (const json::exception& e) {
        throw ParseError(file.string() + ": " + e.what());
    }
}

std::string f4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

constexpr const char* kMetricKeys[] = {"mae", "mae_bc", "mae_cc", "mae_ec", "kl"};
constexpr const char* kMetricHeader = "| MAE | MAE(BC) | MAE(CC) | MAE(EC) | KL |";

std::string metric_cells(const json& m) {
    std::string s;
    for (const char* k : kMetricKeys) s += " " + f4(m.at(k).get<double>()) + " |";
    return s;
}

std::string mean_std_cells(const json& mean, const json& sd) {
    std::string s;
    for (const char* k : kMetricKeys) s += " " + f4(mean.at(k).get<double>()) + " ± " + f4(sd.at(k).get<double>()) + " |";
    return s;
}

std::string method_name(Variant v) {
    switch (v) {
        case Variant::Full: return "SG-Net";
        case Variant::NoAlign: return "SG-Net w/o alignment";
        case Variant::StatAlign: return "Statistical alignment based SG-Net";
        case Variant::VgaeAlign: return "VGAE alignment based SG-Net";
        case Variant::ArgaAlign: return "ARGA alignment based SG-Net";
        case Variant::NoPcc: return "SG-Net w/o PCC";
        case Variant::NoTopology: return "SG-Net w/o topology";
    }
    return "?";
}

struct LossLog {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::vector<double> column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return {};
        const auto c = static_cast<std::size_t>(it - header.begin());
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(c < r.size() ? std::stod(r[c]) : 0.0);
        return out;
    }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    return cells;
}

LossLog read_log(const fs::path& file) {
    LossLog log;
    std::istringstream in(read_text(file));
    std::string line;
    if (std::getline(in, line)) log.header = split(line);
    while (std::getline(in, line))
        if (!line.empty()) log.rows.push_back(split(line));
    return log;
}

// A finished training run directory.
struct Run {
    fs::path dir;
    RunConfig cfg;
    json metrics;
    std::vector<LossLog> logs;
};

void require(std::vector<std::string>& missing, const fs::path& p) {
    if (!fs::exists(p)) missing.push_back(p.string());
}

void check_run(const fs::path& dir, std::vector<std::string>& missing) {
    require(missing, dir / "config.ini");
    require(missing, dir / "metrics.json");
    if (!fs::exists(dir / "config.ini")) return;
    const RunConfig cfg = load_run_config(dir / "config.ini");
    for (std::size_t k = 0; k < cfg.folds; ++k) {
        const fs::path fd = dir / ("fold_" + std::to_string(k));
        require(missing, fd / "loss_log.csv");
        require(missing, fd / "metrics.json");
    }
}

Run load_run(const fs::path& dir) {
    Run r;
    r.dir = dir;
    r.cfg = load_run_config(dir / "config.ini");
    r.metrics = read_json(dir / "metrics.json");
    for (std::size_t k = 0; k < r.cfg.folds; ++k)
        r.logs.push_back(read_log(dir / ("fold_" + std::to_string(k)) / "loss_log.csv"));
    return r;
}

[[noreturn]] void throw_missing(const fs::path& run_dir, const std::vector<std::string>& missing) {
    std::string msg = "report: run directory " + run_dir.string() + " is missing " +
                      std::to_string(missing.size()) + " artifact(s):";
    for (const std::string& m : missing) msg += "\n  " + m;
    throw IoError(msg);
}

std::string settings_line(const RunConfig& c) {
    const Resolutions r = c.dims().resolutions();
    return "Profile " + std::string(profile_name(c.profile)) + " (" + std::to_string(r.source) + "/" +
           std::to_string(r.target_lr) + "/" + std::to_string(r.target_hr) + " nodes), " +
           std::to_string(c.folds) + " folds, " + std::to_string(c.epochs) + " epochs, seed " +
           std::to_string(c.seed) + ", lr_g " + format_double(c.lr_g) + ", lr_d " + format_double(c.lr_d) + ".\n";
}

std::string fold_tables(const Run& run) {
    const Resolutions r = run.cfg.dims().resolutions();
    std::string md;
    for (const auto& [stair, title, nodes] :
         {std::tuple{"lr", "Inter stair (target LR", r.target_lr}, std::tuple{"hr", "Intra stair (target HR", r.target_hr}}) {
        md += std::string("\n## ") + title + ", " + std::to_string(nodes) + " nodes)\n\n";
        md += std::string("| Fold ") + kMetricHeader + "\n|---|---|---|---|---|---|\n";
        for (const json& f : run.metrics.at("folds"))
            md += "| " + std::to_string(f.at("fold").get<std::size_t>()) + " |" + metric_cells(f.at(stair)) + "\n";
        md += "| mean ± std |" + mean_std_cells(run.metrics.at("mean").at(stair), run.metrics.at("std").at(stair)) + "\n";
    }
    return md;
}

std::string ablation_tables(const RunConfig& base, const json& ablation) {
    const Resolutions r = base.dims().resolutions();
    std::string md;
    for (const auto& [stair, title, nodes] :
         {std::tuple{"hr", "Final stair (target HR", r.target_hr}, std::tuple{"lr", "Inter stair (target LR", r.target_lr}}) {
        md += std::string("\n## ") + title + ", " + std::to_string(nodes) + " nodes), mean ± std over " +
              std::to_string(base.folds) + " folds\n\n";
        md += std::string("| Variant | Method ") + kMetricHeader + "\n|---|---|---|---|---|---|---|\n";
        if (std::string(stair) == "hr")
            md += "| gsr_net | GSR-Net | not implemented | not implemented | not implemented | not implemented | "
                  "not implemented |\n";
        for (const json& row : ablation.at("rows")) {
            if (row.at("stair").get<std::string>() != stair) continue;
            const std::string v = row.at("variant").get<std::string>();
            md += "| " + v + " | " + method_name(parse_variant(v).value_or(Variant::Full)) + " |" +
                  mean_std_cells(row.at("mean"), row.at("std")) + "\n";
        }
    }
    return md;
}

// Figures and edge lists of one run written into `out`.
std::string figures(const Run& run, const fs::path& out) {
    std::string md;

    // loss curves
    std::string csv = "fold";
    if (!run.logs.empty())
        for (const std::string& h : run.logs.front().header) csv += "," + h;
    csv += "\n";
    std::vector<Series> gtp, disc;
    for (std::size_t k = 0; k < run.logs.size(); ++k) {
        const LossLog& log = run.logs[k];
        for (const auto& row : log.rows) {
            csv += std::to_string(k);
            for (const std::string& c : row) csv += "," + c;
            csv += "\n";
        }
        gtp.push_back({"fold " + std::to_string(k), log.column("gtp_total")});
        std::vector<double> d = log.column("d_inter");
        const std::vector<double> d2 = log.column("d_intra"), d3 = log.column("d_align");
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += (i < d2.size() ? d2[i] : 0.0) + (i < d3.size() ? d3[i] : 0.0);
        disc.push_back({"fold " + std::to_string(k), d});
    }
    write_text(out / "loss_curves.csv", csv);
    write_text(out / "loss_gtp.svg",
               line_chart_svg(gtp, "Generator GT-P loss (inter + intra)", "epoch", "batch-mean loss"));
    write_text(out / "loss_discriminators.svg",
               line_chart_svg(disc, "Discriminator loss (align + inter + intra)", "epoch", "batch-mean loss"));
    md += "\n## Loss curves\n\nPer-epoch values are in `loss_curves.csv`.\n\n"
          "![generator GT-P](loss_gtp.svg)\n![discriminators](loss_discriminators.svg)\n";

    const json& folds = run.metrics.at("folds");
    std::map<std::string, std::size_t> fold_of;
    std::vector<std::string> test_ids;
    for (const json& f : folds)
        for (const json& id : f.at("test_ids")) {
            fold_of[id.get<std::string>()] = f.at("fold").get<std::size_t>();
            test_ids.push_back(id.get<std::string>());
        }
    if (test_ids.empty()) throw IoError("report: " + (run.dir / "metrics.json").string() + " lists no test subjects");

    Rng rng(run.cfg.seed ^ 0x7E57ED6E5ULL);
    std::vector<std::string> chosen = test_ids;
    const std::size_t picks = std::min(kTopSubjects, chosen.size());
    for (std::size_t i = 0; i < picks; ++i) std::swap(chosen[i], chosen[i + rng.uniform_index(chosen.size() - i)]);
    chosen.resize(picks);
    const std::string& rep = test_ids.front();

    auto pred_file = [&](const std::string& id, const char* stair) {
        return run.dir / ("fold_" + std::to_string(fold_of.at(id))) / "predictions" / (id + "_" + stair + ".csv");
    };
    std::vector<std::string> missing;
    for (const char* stair : {"lr", "hr"}) require(missing, pred_file(rep, stair));
    for (const std::string& id : chosen) require(missing, pred_file(id, "hr"));
    if (!run.cfg.data_path.empty()) require(missing, run.cfg.data_path);
    if (!missing.empty()) throw_missing(run.dir, missing);

    const Dataset ds = resolve_dataset(run.cfg);

    // residuals of the representative subject
    const SubjectTriple& s = ds.find(rep);
    md += "\n## Residuals for test subject " + rep + " (fold " + std::to_string(fold_of.at(rep)) + ")\n\n";
    md += "| Stair | mean off-diagonal residual | max residual | files |\n|---|---|---|---|\n";
    for (const char* stair : {"lr", "hr"}) {
        const bool hr = std::string(stair) == "hr";
        const Matrix pred = read_graph_csv(pred_file(rep, stair));
        const Matrix& real = hr ? s.target_hr.adjacency() : s.target_lr.adjacency();
        const Residual res = residual_matrix(pred, real);
        const double vmax = std::max(1e-12, *std::max_element(res.matrix.values().begin(), res.matrix.values().end()));
        const std::string base = "residual_" + rep + "_" + stair;
        write_matrix_csv(res.matrix, out / (base + ".csv"));
        write_heatmap_png(res.matrix, 0.0, vmax, out / (base + ".png"));
        md += std::string("| ") + (hr ? "HR" : "LR") + " | " + f4(res.mean) + " | " + f4(vmax) + " | `" + base +
              ".csv`, `" + base + ".png` |\n";
        if (hr) {
            write_heatmap_png(real, 0.0, 1.0, out / ("real_" + rep + "_hr.png"));
            write_heatmap_png(pred, 0.0, 1.0, out / ("pred_" + rep + "_hr.png"));
        }
    }
    md += "\nGround truth, prediction (colour scale 0 to 1) and residual (0 to its max) for the HR graph:\n\n";
    md += "![real](real_" + rep + "_hr.png) ![predicted](pred_" + rep + "_hr.png) ![residual](residual_" + rep +
          "_hr.png)\n";

    // strongest connectivities
    md += "\n## Top-" + std::to_string(kTopK) + " connectivities (HR)\n";
    for (const std::string& id : chosen) {
        const Matrix pred = read_graph_csv(pred_file(id, "hr"));
        const Matrix& real = ds.find(id).target_hr.adjacency();
        const auto tr = top_k_connectivities(real, kTopK);
        const auto tp = top_k_connectivities(pred, kTopK);
        std::size_t shared = 0;
        for (const Connection& a : tr)
            for (const Connection& b : tp) shared += a.row == b.row && a.col == b.col;
        md += "\nSubject " + id + " (fold " + std::to_string(fold_of.at(id)) + "), " + std::to_string(shared) +
              " of " + std::to_string(kTopK) + " edges shared.\n\n";
        md += "| Rank | Real edge | Real weight | Predicted edge | Predicted weight |\n|---|---|---|---|---|\n";
        std::string top_csv = "rank,real_row,real_col,real_weight,pred_row,pred_col,pred_weight\n";
        for (std::size_t i = 0; i < tr.size(); ++i) {
            md += "| " + std::to_string(i + 1) + " | (" + std::to_string(tr[i].row) + ", " + std::to_string(tr[i].col) +
                  ") | " + f4(tr[i].weight) + " | (" + std::to_string(tp[i].row) + ", " + std::to_string(tp[i].col) +
                  ") | " + f4(tp[i].weight) + " |\n";
            top_csv += std::to_string(i + 1) + "," + std::to_string(tr[i].row) + "," + std::to_string(tr[i].col) + "," +
                       format_double(tr[i].weight) + "," + std::to_string(tp[i].row) + "," +
                       std::to_string(tp[i].col) + "," + format_double(tp[i].weight) + "\n";
        }
        write_text(out / ("top10_" + id + ".csv"), top_csv);
    }
    return md;
}

}  // namespace

std::string write_report(const fs::path& run_dir) {
    if (!fs::is_directory(run_dir)) throw IoError("report: " + run_dir.string() + " is not a directory");
    const bool ablation = fs::exists(run_dir / "ablation.json");
    std::vector<std::string> missing;
    std::string md;
    const fs::path out = run_dir / "report";

    if (ablation) {
        require(missing, run_dir / "config.ini");
        for (Variant v : kAllVariants) check_run(run_dir / std::string(variant_name(v)), missing);
        if (!missing.empty()) throw_missing(run_dir, missing);
        const RunConfig base = load_run_config(run_dir / "config.ini");
        const json table = read_json(run_dir / "ablation.json");
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
        md += "# Ablation report\n\n" + settings_line(base);
        md += ablation_tables(base, table);

        std::vector<Series> curves;
        for (Variant v : kAllVariants) {
            const Run r = load_run(run_dir / std::string(variant_name(v)));
            std::vector<double> mean;
            for (const LossLog& log : r.logs) {
                const auto g = log.column("gtp_total");
                if (mean.size() < g.size()) mean.resize(g.size(), 0.0);
                for (std::size_t i = 0; i < g.size(); ++i) mean[i] += g[i] / static_cast<double>(r.logs.size());
            }
            curves.push_back({std::string(variant_name(v)), mean});
        }
        write_text(out / "loss_gtp_variants.svg",
                   line_chart_svg(curves, "Fold-mean generator GT-P loss per variant", "epoch", "batch-mean loss"));
        md += "\n![GT-P per variant](loss_gtp_variants.svg)\n";
        md += "\nThe figures below are from the `full` variant.\n";
        md += figures(load_run(run_dir / "full"), out);
    } else {
        check_run(run_dir, missing);
        if (!missing.empty()) throw_missing(run_dir, missing);
        const Run run = load_run(run_dir);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
        md += "# Run report\n\nVariant " + std::string(variant_name(run.cfg.variant)) + " (" +
              method_name(run.cfg.variant) + "). " + settings_line(run.cfg);
        md += fold_tables(run);
        md += figures(run, out);
    }
    write_text(out / "report.md", md);
    return md;
}

}  // namespace sgnet
