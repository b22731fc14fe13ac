#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sgnet/brain_graph.hpp"
#include "sgnet/checkpoint.hpp"
#include "sgnet/run_config.hpp"
#include "sgnet/topology.hpp"

namespace sgnet {

// Run directory layout written by train():
//   config.ini                  the effective configuration
//   metrics.json                per-fold and mean/std metrics for both stairs
//   fold_<k>/loss_log.csv       one row per epoch, batch means of every loss
//   fold_<k>/checkpoint_epoch_<NNNN>.ckpt, fold_<k>/checkpoint_latest.ckpt
//   fold_<k>/metrics.json       test-fold metrics
//   fold_<k>/predictions/<id>_lr.csv, <id>_hr.csv

struct StairMetrics {
    MetricReport lr;  // inter stair output
    MetricReport hr;  // intra stair output
};

struct FoldResult {
    std::size_t fold = 0;
    std::vector<std::string> test_ids;
    StairMetrics metrics;
    std::vector<double> gtp_curve;  // per-epoch generator GT-P (inter + intra), warm-up excluded
};

struct RunResult {
    Variant variant = Variant::Full;
    std::vector<FoldResult> folds;
    StairMetrics mean;
    StairMetrics std;  // population std over folds
    double seconds = 0.0;
};

struct TrainOptions {
    /// Continue every fold from its latest checkpoint when one exists.
    bool resume = false;
    /// Called for every subject read while fitting fold `fold`.
    std::function<void(std::size_t fold, const std::string& subject_id)> on_train_read;
    std::ostream* progress = nullptr;
};

/// Loads cfg.data_path or synthesizes the configured cohort.
Dataset resolve_dataset(const RunConfig& cfg);

/// Fresh, seeded state for one fold.
TrainingState initial_fold_state(const RunConfig& cfg, std::size_t fold, const EdgeStats& stat_target);

/// Runs epochs on `state` until `state.epoch` reaches the configured total
/// (aligner warm-up plus cfg.epochs). Training subjects are read only through
/// `view`. Each finished epoch is passed to `on_epoch`; NumericError from a
/// step is rethrown with fold, epoch and batch prepended.
void fit(TrainingState& state, const DatasetView& view, const std::vector<std::string>& train_ids,
         const std::function<void(const TrainingState&, const std::string& phase,
                                  const std::array<double, StepLog::kFields>&)>& on_epoch);

/// Eval-mode predictions of the state's model for the given subjects.
struct PredictionSet {
    std::vector<std::string> ids;
    std::vector<Matrix> lr, hr;
    std::vector<Matrix> real_lr, real_hr;
};
PredictionSet predict_subjects(TrainingState& state, const Dataset& ds,
                               const std::vector<std::string>& ids);
StairMetrics score(const PredictionSet& p);

/// Trains and evaluates every fold, writing the run directory cfg.out_dir.
RunResult train(const RunConfig& cfg, const TrainOptions& options = {});
RunResult train(const RunConfig& cfg, const Dataset& ds, const TrainOptions& options = {});

/// Trains each of the seven variants on the same folds and seed into
/// cfg.out_dir/<variant>/ and writes cfg.out_dir/ablation.json.
std::vector<RunResult> run_ablation(const RunConfig& cfg, const TrainOptions& options = {});

struct Residual {
    Matrix matrix;  // |pred - real|
    double mean = 0.0;  // over off-diagonal entries
};
Residual residual_matrix(const Matrix& pred, const Matrix& real);

struct Connection {
    std::size_t row = 0;
    std::size_t col = 0;
    double weight = 0.0;
};
/// Strict upper triangle sorted by weight descending, ties by (row, col).
std::vector<Connection> top_k_connectivities(const Matrix& g, std::size_t k);

}  // namespace sgnet
