#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dynfield/geometry.hpp"
#include "dynfield/training.hpp"

namespace dynfield {

/// Everything one experiment needs, with desk-scale defaults. Loaded from
/// a JSON file where every key is optional; the fully resolved form is
/// echoed next to the outputs and hashed into every file produced.
struct ExperimentConfig {
    std::string profile = "desk";  ///< base system profile: "desk" or "paper"
    ImagingSystem system;          ///< profile plus any explicit overrides
    std::uint64_t seed = 1;        ///< global seed: noise, init, batching, sampling
    std::uint64_t phantom_seed = 7;
    std::filesystem::path out_dir = "out";

    int generation_supersample = 2;  ///< data-generation grid multiplier
    int generation_subdivision = 4;  ///< arc steps per pixel pitch in the matrix build
    int reference_supersample = 2;   ///< sub-pixel averaging for rendered references

    std::string method = "all";  ///< nf-tv | pw-tv | pw-nn | all
    TrainConfig train;

    double prox_step = 0.0;  ///< 0 = estimate 1/L
    int prox_max_iter = 200;
    int prox_tv_inner = 20;
    double prox_tv_time_weight = 1.0;

    std::string sweep_axis = "none";  ///< none | views | noise | rank
    std::vector<double> sweep_values;

    double morozov_largest = 1e-1;
    double morozov_ratio = 10.0;
    int morozov_count = 3;

    std::vector<int> ss_ranks = {1, 2, 4};
    std::vector<std::array<double, 2>> probes = {{0.0, 0.0}, {0.5, 0.25}};

    void validate() const;

    /// Canonical JSON echo of every resolved field (sorted keys).
    std::string canonical_json() const;
    /// Hex FNV-1a hash of the canonical echo.
    std::string hash() const;
};

/// Training presets selected by the config profile. The desk preset is
/// sized so the bundled studies finish on one core; the paper preset
/// mirrors the full-scale setup.
TrainConfig desk_train_defaults();
TrainConfig paper_train_defaults();

/// Parses a JSON config. Unknown keys are rejected so typos fail loudly.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes the canonical echo into dir/config_echo.json.
void echo_config(const ExperimentConfig& cfg, const std::filesystem::path& dir);

/// Output root override: when DYNFIELD_OUT_ROOT is set, relative out_dir
/// values are anchored under it.
std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg);

}  // namespace dynfield
