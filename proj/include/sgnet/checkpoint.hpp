#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "sgnet/rng.hpp"
#include "sgnet/run_config.hpp"
#include "sgnet/synthgan.hpp"

namespace sgnet {

// Everything needed to continue a fold bit-exactly.
struct TrainingState {
    RunConfig config;
    std::size_t fold = 0;
    std::size_t epoch = 0;  // completed epochs, aligner warm-up included
    SgNetParams model;
    Optimizers optimizers;
    Rng rng;
    EdgeStats stat_target;
};

// File layout: the 8 bytes "SGNETCK1", a little-endian u64 header length, a
// JSON header (config text and hash, fold, epoch, RNG state, tensor names,
// shapes and offsets), then every tensor as little-endian IEEE-754 doubles.
void save_checkpoint(const TrainingState& state, const std::filesystem::path& file);

/// Throws IoError for unreadable files and ParseError for malformed ones.
TrainingState load_checkpoint(const std::filesystem::path& file);

}  // namespace sgnet
