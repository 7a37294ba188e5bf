#pragma once

#include <filesystem>
#include <vector>

#include "dynfield/config.hpp"

namespace dynfield {

/// Experiment subcommands. Each returns a process exit code: 0 on
/// success, 1 on a numerical abort. Usage problems throw
/// std::invalid_argument for the entry point to map to exit code 2.
int cmd_phantom(const ExperimentConfig& cfg);
int cmd_simulate(const ExperimentConfig& cfg);
int cmd_embed(const ExperimentConfig& cfg);
int cmd_reconstruct(const ExperimentConfig& cfg);

struct SvdArgs {
    std::filesystem::path input;
    std::vector<int> ranks = {1, 2, 4};
    std::filesystem::path out_dir;
};
int cmd_svd(const SvdArgs& args);

struct RenderArgs {
    std::filesystem::path input;
    std::filesystem::path out_dir;
    double window_min = 0.0;
    double window_max = -1.0;  ///< max < min means auto window
};
int cmd_render(const RenderArgs& args);

struct MetricsArgs {
    std::filesystem::path file_a;
    std::filesystem::path file_b;
    std::filesystem::path out_csv;  ///< empty: stdout only
};
int cmd_metrics(const MetricsArgs& args);

}  // namespace dynfield
