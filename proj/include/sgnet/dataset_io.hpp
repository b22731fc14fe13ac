#pragma once

#include <filesystem>

#include "sgnet/brain_graph.hpp"

namespace sgnet {

// On-disk layout:
//   <dir>/manifest.json                      subject ids, seed, shift, resolutions
//   <dir>/<subject_id>/source_<n>.csv        e.g. source_35.csv
//   <dir>/<subject_id>/target_<n'>.csv       e.g. target_160.csv
//   <dir>/<subject_id>/target_<n''>.csv      e.g. target_268.csv
// CSV files hold n rows of n comma-separated decimals, no header. Values are
// written in shortest round-trip form, so a save/load cycle is bit-exact.

void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

void write_matrix_csv(const Matrix& m, const std::filesystem::path& file);
/// Parses a rectangular CSV of doubles. ParseError names the file, row and column.
Matrix read_matrix_csv(const std::filesystem::path& file);
/// read_matrix_csv plus square/symmetry/diagonal/range checks for a graph file;
/// asymmetry up to 1e-6 is averaged away, anything larger is a ParseError.
Matrix read_graph_csv(const std::filesystem::path& file);

std::string format_double(double v);

}  // namespace sgnet
