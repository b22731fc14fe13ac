#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "sgnet/brain_graph.hpp"
#include "sgnet/synthgan.hpp"

namespace sgnet {

enum class DimsProfile { Paper, Desk };

std::string_view profile_name(DimsProfile p);

// Everything a training run depends on. Read from an INI file:
//
//   [data]   path, subjects, seed, shift_mean, shift_std
//   [model]  profile (paper|desk), variant, prior (lifted|standard_normal),
//            ec_iterations, teacher_forcing
//   [train]  folds, epochs, lr_g, lr_d, batch_size, seed, checkpoint_every,
//            align_warmup_epochs, out_dir
//   [loss]   align_adversarial, align_reconstruction, align_kl,
//            gtp_adversarial, gtp_l1, gtp_pcc, gtp_topology
//
// Missing keys keep their defaults; unknown keys are a ConfigError.
struct RunConfig {
    // data: an existing dataset directory, or synthesis parameters when empty
    std::filesystem::path data_path;
    std::size_t subjects = 30;
    std::uint64_t data_seed = 1;
    DomainShift shift;

    DimsProfile profile = DimsProfile::Paper;
    Variant variant = Variant::Full;
    PriorKind prior = PriorKind::Lifted;
    std::size_t ec_iterations = 50;
    bool teacher_forcing = false;

    std::size_t folds = 3;
    std::size_t epochs = 400;
    double lr_g = 0.025;
    double lr_d = 0.01;
    std::size_t batch_size = 5;
    std::uint64_t seed = 0;
    std::size_t checkpoint_every = 50;
    std::size_t align_warmup_epochs = 0;
    std::filesystem::path out_dir = "sgnet_run";

    AlignLossWeights align_weights;
    GtpLossWeights gtp_weights;

    /// Throws ConfigError naming the first offending field.
    void validate() const;

    ModelDims dims() const;
    /// Base GAN configuration; stat_target still has to be set from the fold.
    GanConfig gan_config() const;
};

RunConfig parse_run_config(const std::string& ini_text, const std::string& origin = "config");
RunConfig load_run_config(const std::filesystem::path& file);
/// Canonical INI text with every field; parse_run_config(to_ini(c)) == c.
std::string to_ini(const RunConfig& c);

/// Reads SGNET_SEED and SGNET_OUT_DIR when set.
void apply_env_overrides(RunConfig& c);

/// FNV-1a over the canonical text of the fields that affect training
/// trajectories (epochs, out_dir and checkpoint_every excluded, so a resumed
/// run with a longer schedule still matches its checkpoints).
std::uint64_t training_hash(const RunConfig& c);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace sgnet
