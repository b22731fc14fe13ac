#pragma once

#include <filesystem>
#include <string>

namespace sgnet {

// Reads a finished run directory (from train() or run_ablation()) and writes
// <run_dir>/report/:
//   report.md                 metric tables, top-10 edge lists, figure links
//   loss_curves.csv           every fold's per-epoch losses
//   loss_gtp.svg, loss_discriminators.svg
//   residual_<id>_{lr,hr}.{csv,png}, real_<id>_hr.png, pred_<id>_hr.png
//   top10_<id>.csv
// The output depends only on the run directory, so rerunning is byte-identical.
// Ablation runs take their figures from the full variant.
// Throws IoError listing every missing artifact.
std::string write_report(const std::filesystem::path& run_dir);

}  // namespace sgnet
