#include <CLI11.hpp>
#include <iostream>
#include <stdexcept>
#include <string>

#include "dynfield/commands.hpp"
#include "dynfield/config.hpp"

namespace {

dynfield::ExperimentConfig config_from(const std::string& path) {
    // No file: the empty config, which resolves to the desk profile.
    if (path.empty()) return dynfield::parse_config("{}");
    return dynfield::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic circular-transform reconstruction experiments"};
    app.require_subcommand(1);

    std::string config_path;
    auto add_config_opt = [&config_path](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "JSON experiment config (defaults: desk profile)");
    };

    CLI::App* sub_phantom = app.add_subcommand("phantom", "render the ground-truth sequences");
    add_config_opt(sub_phantom);
    CLI::App* sub_simulate = app.add_subcommand("simulate", "generate clean and noisy data");
    add_config_opt(sub_simulate);
    CLI::App* sub_embed = app.add_subcommand("embed", "fit the field to ground-truth samples");
    add_config_opt(sub_embed);
    CLI::App* sub_reconstruct =
        app.add_subcommand("reconstruct", "run the sweep reconstructions with selected gamma");
    add_config_opt(sub_reconstruct);

    dynfield::SvdArgs svd_args;
    CLI::App* sub_svd = app.add_subcommand("svd", "spectrum and rank-r approximations of a sequence");
    sub_svd->add_option("-i,--input", svd_args.input, "image sequence base path")->required();
    sub_svd->add_option("-r,--ranks", svd_args.ranks, "ranks to keep");
    sub_svd->add_option("-o,--out", svd_args.out_dir, "output directory")->required();

    dynfield::RenderArgs render_args;
    CLI::App* sub_render = app.add_subcommand("render", "export grayscale frames of a sequence");
    sub_render->add_option("-i,--input", render_args.input, "image sequence base path")->required();
    sub_render->add_option("-o,--out", render_args.out_dir, "output directory")->required();
    sub_render->add_option("--min", render_args.window_min, "intensity window lower edge");
    sub_render->add_option("--max", render_args.window_max, "intensity window upper edge");

    dynfield::MetricsArgs metrics_args;
    CLI::App* sub_metrics = app.add_subcommand("metrics", "error metrics between two sequences");
    sub_metrics->add_option("-a", metrics_args.file_a, "first sequence base path")->required();
    sub_metrics->add_option("-b", metrics_args.file_b, "second sequence base path")->required();
    sub_metrics->add_option("-o,--out", metrics_args.out_csv, "also write the CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sub_phantom->parsed()) return dynfield::cmd_phantom(config_from(config_path));
        if (sub_simulate->parsed()) return dynfield::cmd_simulate(config_from(config_path));
        if (sub_embed->parsed()) return dynfield::cmd_embed(config_from(config_path));
        if (sub_reconstruct->parsed()) return dynfield::cmd_reconstruct(config_from(config_path));
        if (sub_svd->parsed()) return dynfield::cmd_svd(svd_args);
        if (sub_render->parsed()) return dynfield::cmd_render(render_args);
        if (sub_metrics->parsed()) return dynfield::cmd_metrics(metrics_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
