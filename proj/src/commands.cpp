#include "dynfield/commands.hpp"

#include <chrono>
#include <iostream>
#include <limits>

#include "dynfield/analysis.hpp"
#include "dynfield/classical.hpp"
#include "dynfield/crt.hpp"
#include "dynfield/io.hpp"
#include "dynfield/phantom.hpp"
#include "dynfield/rng.hpp"
#include "dynfield/sparse_crt.hpp"
#include "dynfield/training.hpp"

namespace dynfield {

namespace {

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

/// One entry of the experiment's sweep: a concrete system and noise level.
struct SweepPoint {
    std::string label;
    double value = 0.0;
    ImagingSystem sys;
    double noise_rel = 0.0;
};

std::vector<SweepPoint> build_sweep(const ExperimentConfig& cfg) {
    std::vector<SweepPoint> points;
    if (cfg.sweep_axis == "views") {
        for (double v : cfg.sweep_values) {
            SweepPoint p;
            p.sys = cfg.system;
            p.sys.num_views = static_cast<int>(v);
            p.sys.validate();
            p.value = v;
            p.noise_rel = cfg.system.relative_noise;
            p.label = "views_" + io::format_int(static_cast<long long>(v));
            points.push_back(std::move(p));
        }
    } else if (cfg.sweep_axis == "noise") {
        for (double v : cfg.sweep_values) {
            SweepPoint p;
            p.sys = cfg.system;
            p.value = v;
            p.noise_rel = v;
            p.label = "noise_" + io::format_double(v);
            points.push_back(std::move(p));
        }
    } else {
        SweepPoint p;
        p.sys = cfg.system;
        p.value = 0.0;
        p.noise_rel = cfg.system.relative_noise;
        p.label = "base";
        points.push_back(std::move(p));
    }
    return points;
}

std::uint64_t noise_seed(const ExperimentConfig& cfg) {
    return hash_combine(cfg.seed, 0x6e6f6973u);
}

fs::path phantom_dir(const ExperimentConfig& cfg) { return resolve_out_dir(cfg) / "phantom"; }
fs::path data_dir(const ExperimentConfig& cfg) { return resolve_out_dir(cfg) / "data"; }
fs::path cache_dir(const ExperimentConfig& cfg) { return resolve_out_dir(cfg) / "cache"; }

bool load_if_current(const fs::path& base, const std::string& cfg_hash, GridImage& out) {
    if (!fs::exists(base.string() + ".hdr")) return false;
    try {
        GridImage img = load_grid_image(base);
        if (img.config_hash != cfg_hash) return false;
        out = std::move(img);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

/// Ground-truth renders at reconstruction and generation resolution,
/// reusing saved files when they match this config.
struct TruthPair {
    GridImage recon_res;
    GridImage gen_res;
};

/// Sequences persist as float32; everything downstream must see exactly
/// the stored values or reruns that reload them would diverge.
void snap_to_storage(GridImage& img) {
    img.values = img.values.cast<float>().cast<double>();
}

TruthPair ensure_truth(const ExperimentConfig& cfg) {
    const fs::path dir = phantom_dir(cfg);
    const std::string h = cfg.hash();
    TruthPair t;
    const bool have_recon = load_if_current(dir / "truth", h, t.recon_res);
    const bool have_gen = load_if_current(dir / "truth_gen", h, t.gen_res);
    if (have_recon && have_gen) return t;

    fs::create_directories(dir);
    const DynamicPhantom ph =
        phantom_default(cfg.phantom_seed, cfg.system.fov_size_L, cfg.system.total_time_T);
    const std::vector<double> times = frame_times(cfg.system);
    if (!have_recon) {
        t.recon_res = render(ph, cfg.system.pixels_per_side, times, cfg.reference_supersample);
        snap_to_storage(t.recon_res);
        t.recon_res.config_hash = h;
        save_grid_image(t.recon_res, dir / "truth");
    }
    if (!have_gen) {
        t.gen_res = render(ph, cfg.system.pixels_per_side * cfg.generation_supersample, times,
                           cfg.reference_supersample);
        snap_to_storage(t.gen_res);
        t.gen_res.config_hash = h;
        save_grid_image(t.gen_res, dir / "truth_gen");
    }
    return t;
}

SparseCrtOperator generation_operator(const ExperimentConfig& cfg, const ImagingSystem& sys,
                                      const GridImage& truth_gen) {
    if (cfg.generation_subdivision == 4) {
        return load_or_build(sys, truth_gen.pixels_per_side, cache_dir(cfg));
    }
    return build_sparse_crt(sys, truth_gen.pixels_per_side, cfg.generation_subdivision);
}

struct SimulatedPoint {
    Sinogram clean;
    Sinogram noisy;
};

SimulatedPoint simulate_point(const ExperimentConfig& cfg, const SweepPoint& point,
                              const GridImage& truth_gen) {
    const SparseCrtOperator op = generation_operator(cfg, point.sys, truth_gen);
    SimulatedPoint out;
    out.clean = sparse_apply_all(op, truth_gen);
    out.clean.config_hash = cfg.hash();
    out.noisy = add_noise(out.clean, point.noise_rel, noise_seed(cfg));
    return out;
}

/// Loads the point's sinograms when present and produced by this config;
/// simulates and saves them otherwise.
SimulatedPoint ensure_sinograms(const ExperimentConfig& cfg, const SweepPoint& point,
                                const GridImage& truth_gen) {
    const fs::path dir = data_dir(cfg) / point.label;
    const std::string h = cfg.hash();
    if (fs::exists(dir / "clean.sino") && fs::exists(dir / "noisy.sino")) {
        try {
            SimulatedPoint sp;
            sp.clean = load_sinogram(dir / "clean.sino");
            sp.noisy = load_sinogram(dir / "noisy.sino");
            if (sp.clean.config_hash == h && sp.noisy.config_hash == h) return sp;
        } catch (const std::exception&) {
        }
    }
    SimulatedPoint sp = simulate_point(cfg, point, truth_gen);
    fs::create_directories(dir);
    save_sinogram(sp.clean, dir / "clean.sino");
    save_sinogram(sp.noisy, dir / "noisy.sino");
    return sp;
}

GridImage image_from_values(const ExperimentConfig& cfg, const ImagingSystem& sys,
                            const Eigen::MatrixXd& values) {
    GridImage img = make_grid_image(sys.pixels_per_side, sys.fov_size_L, frame_times(sys));
    img.values = values;
    img.config_hash = cfg.hash();
    return img;
}

int rank_above_tol(const Eigen::MatrixXd& values, double rel_tol = 1e-9) {
    const Eigen::VectorXd sig = singular_spectrum(values);
    if (sig.size() == 0 || sig[0] <= 0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sig.size(); ++i) {
        if (sig[i] > rel_tol * sig[0]) ++r;
    }
    return r;
}

void save_time_activity(const Eigen::MatrixXd& series, const std::vector<double>& times,
                        const fs::path& path) {
    io::CsvWriter csv;
    std::vector<std::string> names = {"t"};
    for (long p = 0; p < series.cols(); ++p) names.push_back("p" + io::format_int(p));
    csv.header(names);
    for (long k = 0; k < series.rows(); ++k) {
        csv.field(times[static_cast<std::size_t>(k)]);
        for (long p = 0; p < series.cols(); ++p) csv.field(series(k, p));
        csv.end_row();
    }
    csv.save(path);
}

void save_spectrum(const Eigen::VectorXd& sigma, const fs::path& path) {
    io::CsvWriter csv;
    csv.header({"index", "sigma"});
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        csv.field(static_cast<long long>(i + 1)).field(sigma[i]);
        csv.end_row();
    }
    csv.save(path);
}

void save_morozov_rows(const std::vector<MorozovRow>& rows, double threshold,
                       const fs::path& path) {
    io::CsvWriter csv;
    csv.comment("threshold=" + io::format_double(threshold));
    csv.header({"gamma", "discrepancy_sq", "satisfied"});
    for (const auto& r : rows) {
        csv.field(r.gamma).field(r.discrepancy_sq).field(static_cast<int>(r.satisfied));
        csv.end_row();
    }
    csv.save(path);
}

/// Per-method row of the reconstruction sweep report.
struct ReconRow {
    std::string point;
    double sweep_value = 0.0;
    std::string method;
    double gamma = 0.0;
    bool satisfied = false;
    double discrepancy = 0.0;
    double threshold = 0.0;
    double rrmse_v = 0.0;
    double ssim_v = 0.0;
    long params = 0;
    int rank = 0;
};

std::vector<std::string> method_list(const ExperimentConfig& cfg) {
    if (cfg.method == "all") return {"nf-tv", "pw-tv", "pw-nn"};
    return {cfg.method};
}

}  // namespace

int cmd_phantom(const ExperimentConfig& cfg) {
    const fs::path dir = phantom_dir(cfg);
    fs::create_directories(dir);
    echo_config(cfg, dir);
    const TruthPair truth = ensure_truth(cfg);
    export_pgm_frames(truth.recon_res, dir / "preview");
    std::cout << "phantom: " << truth.recon_res.pixels_per_side << "px reference and "
              << truth.gen_res.pixels_per_side << "px generation grids, "
              << truth.recon_res.frames() << " frames -> " << dir.string() << "\n";
    return 0;
}

int cmd_simulate(const ExperimentConfig& cfg) {
    const fs::path dir = data_dir(cfg);
    fs::create_directories(dir);
    echo_config(cfg, dir);
    const TruthPair truth = ensure_truth(cfg);
    for (const SweepPoint& point : build_sweep(cfg)) {
        const SimulatedPoint sp = ensure_sinograms(cfg, point, truth.gen_res);
        std::cout << "simulate " << point.label << ": sigma=" << io::format_double(sp.noisy.sigma)
                  << ", " << sp.noisy.sample_count() << " samples\n";
    }
    return 0;
}

int cmd_embed(const ExperimentConfig& cfg) {
    const fs::path dir = resolve_out_dir(cfg) / "embed";
    fs::create_directories(dir);
    echo_config(cfg, dir);
    const std::string h = cfg.hash();
    const TruthPair truth = ensure_truth(cfg);
    const DomainBox domain = domain_of(cfg.system);
    const std::vector<double> times = frame_times(cfg.system);

    const auto t0 = clock_type::now();
    TrainResult result = reconstruct_embedding(truth.recon_res, domain, cfg.train);
    const double train_seconds = seconds_since(t0);
    result.report.save_csv(dir / "train_report.csv");
    result.report.save_timings(dir / "train_timings.csv");
    if (result.report.aborted) {
        std::cerr << "embed: training aborted: " << result.report.abort_reason << "\n";
        return 1;
    }
    save_pounet(result.field, dir / "nf.pounet", h);
    GridImage nf_img = render_field(result.field, cfg.system, cfg.reference_supersample);
    nf_img.config_hash = h;
    save_grid_image(nf_img, dir / "nf");
    save_time_activity(time_activity(result.field, domain, times, cfg.probes), times,
                       dir / "ta_nf.csv");
    save_time_activity(time_activity(truth.recon_res, cfg.probes), times, dir / "ta_truth.csv");
    save_spectrum(singular_spectrum(truth.recon_res.values), dir / "spectrum.csv");

    std::vector<int> ranks = cfg.ss_ranks;
    if (cfg.sweep_axis == "rank") {
        ranks.clear();
        for (double v : cfg.sweep_values) ranks.push_back(static_cast<int>(v));
    }

    io::CsvWriter csv;
    csv.comment("config_hash=" + h);
    csv.header({"method", "rank", "params", "rrmse", "ssim"});
    csv.field("nf").field(0).field(static_cast<long long>(result.field.param_count()));
    csv.field(rrmse(nf_img.values, truth.recon_res.values));
    csv.field(ssim(nf_img.values, truth.recon_res.values, cfg.system.pixels_per_side));
    csv.end_row();
    for (int r : ranks) {
        const SemiseparableApprox ss = truncated_svd(truth.recon_res.values, r);
        const Eigen::MatrixXd recon = ss.reconstruction();
        GridImage ss_img = image_from_values(cfg, cfg.system, recon);
        save_grid_image(ss_img, dir / ("ss_" + io::format_int(r)));
        save_time_activity(time_activity(ss_img, cfg.probes), times,
                           dir / ("ta_ss_" + io::format_int(r) + ".csv"));
        csv.field("ss").field(r).field(static_cast<long long>(ss.param_count()));
        csv.field(rrmse(recon, truth.recon_res.values));
        csv.field(ssim(recon, truth.recon_res.values, cfg.system.pixels_per_side));
        csv.end_row();
    }
    csv.save(dir / "report.csv");

    io::CsvWriter tim;
    tim.header({"stage", "seconds"});
    tim.field("train").field(train_seconds).end_row();
    tim.save(dir / "timings.csv");
    std::cout << "embed: report at " << (dir / "report.csv").string() << "\n";
    return 0;
}

int cmd_reconstruct(const ExperimentConfig& cfg) {
    const fs::path dir = resolve_out_dir(cfg) / "reconstruct";
    fs::create_directories(dir);
    echo_config(cfg, dir);
    const std::string h = cfg.hash();
    const TruthPair truth = ensure_truth(cfg);
    const std::vector<double> grid =
        geometric_grid(cfg.morozov_largest, cfg.morozov_ratio, cfg.morozov_count);

    std::vector<ReconRow> rows;
    io::CsvWriter tim;
    tim.header({"point", "method", "seconds"});
    bool any_abort = false;

    for (const SweepPoint& point : build_sweep(cfg)) {
        const SimulatedPoint sp = ensure_sinograms(cfg, point, truth.gen_res);
        const Sinogram& noisy = sp.noisy;
        const double threshold = morozov_threshold(noisy);

        for (const std::string& method : method_list(cfg)) {
            const fs::path mdir = dir / point.label / method;
            fs::create_directories(mdir);
            const auto t0 = clock_type::now();
            ReconRow row;
            row.point = point.label;
            row.sweep_value = point.value;
            row.method = method;
            row.threshold = threshold;
            GridImage recon_img;

            if (method == "nf-tv") {
                auto solve = std::function<TrainResult(double)>([&](double gamma) {
                    TrainConfig tcfg = cfg.train;
                    tcfg.tv_gamma = gamma;
                    return reconstruct_nf(noisy, point.sys, tcfg);
                });
                // Discrepancy uses the solver's own forward model: the arc quadrature the
                // training loop optimized against, not the (finer) acquisition setting.
                ImagingSystem dsys = point.sys;
                if (cfg.train.quad_q > 0) dsys.quadrature_points_Q = cfg.train.quad_q;
                auto disc = std::function<double(const TrainResult&)>([&, dsys](const TrainResult& r) {
                    if (r.report.aborted) return std::numeric_limits<double>::infinity();
                    const Sinogram pred = crt_apply_field_all(r.field, dsys);
                    return (pred.data - noisy.data).squaredNorm();
                });
                auto mres = morozov_search<TrainResult>(solve, disc, threshold, grid);
                save_morozov_rows(mres.rows, threshold, mdir / "morozov.csv");
                TrainResult& best = *mres.recon;
                best.report.save_csv(mdir / "train_report.csv");
                best.report.save_timings(mdir / "train_timings.csv");
                if (best.report.aborted) {
                    std::cerr << "reconstruct " << point.label
                              << " nf-tv: aborted: " << best.report.abort_reason << "\n";
                    any_abort = true;
                    continue;
                }
                save_pounet(best.field, mdir / "nf.pounet", h);
                recon_img = render_field(best.field, point.sys, cfg.reference_supersample);
                recon_img.config_hash = h;
                row.gamma = mres.gamma;
                row.satisfied = mres.satisfied;
                row.discrepancy = mres.rows.back().discrepancy_sq;
                row.params = best.field.param_count();
                row.rank = 0;
            } else {
                const SparseCrtOperator op =
                    load_or_build(point.sys, point.sys.pixels_per_side, cache_dir(cfg));
                ProxProblem prob;
                prob.op = &op;
                prob.data = &noisy;
                prob.reg = method == "pw-tv" ? Regularizer::SpaceTimeTv : Regularizer::Nuclear;
                prob.max_iter = cfg.prox_max_iter;
                prob.tv_inner_iter = cfg.prox_tv_inner;
                prob.tv_time_weight = cfg.prox_tv_time_weight;
                prob.step = cfg.prox_step > 0
                                ? cfg.prox_step
                                : 1.0 / lipschitz_estimate(
                                             op, noisy.sigma > 0 ? noisy.sigma : 1.0);
                const Eigen::MatrixXd start =
                    Eigen::MatrixXd::Zero(op.cols(), noisy.num_frames());
                auto solve = std::function<FistaResult(double)>([&](double gamma) {
                    ProxProblem p = prob;
                    p.gamma = gamma;
                    return fista(p, start);
                });
                auto disc = std::function<double(const FistaResult&)>([&](const FistaResult& r) {
                    if (r.report.aborted) return std::numeric_limits<double>::infinity();
                    return discrepancy_sq(r.values, op, noisy.data);
                });
                auto mres = morozov_search<FistaResult>(solve, disc, threshold, grid);
                save_morozov_rows(mres.rows, threshold, mdir / "morozov.csv");
                FistaResult& best = *mres.recon;
                best.report.save_csv(mdir / "fista_report.csv");
                if (best.report.aborted) {
                    std::cerr << "reconstruct " << point.label << " " << method << ": aborted\n";
                    any_abort = true;
                    continue;
                }
                recon_img = image_from_values(cfg, point.sys, best.values);
                row.gamma = mres.gamma;
                row.satisfied = mres.satisfied;
                row.discrepancy = mres.rows.back().discrepancy_sq;
                if (method == "pw-nn") {
                    row.rank = rank_above_tol(best.values);
                    row.params = static_cast<long>(row.rank) *
                                 (best.values.rows() + best.values.cols());
                } else {
                    row.rank = 0;
                    row.params = static_cast<long>(best.values.size());
                }
            }

            save_grid_image(recon_img, mdir / "recon");
            export_pgm_frames(recon_img, mdir / "frames");
            save_time_activity(time_activity(recon_img, cfg.probes), frame_times(point.sys),
                               mdir / "ta.csv");
            row.rrmse_v = rrmse(recon_img.values, truth.recon_res.values);
            row.ssim_v =
                ssim(recon_img.values, truth.recon_res.values, point.sys.pixels_per_side);
            rows.push_back(row);
            tim.field(point.label).field(method).field(seconds_since(t0)).end_row();
            std::cout << "reconstruct " << point.label << " " << method
                      << ": gamma=" << io::format_double(row.gamma)
                      << (row.satisfied ? "" : " (discrepancy not met)")
                      << " rrmse=" << io::format_double(row.rrmse_v) << "\n";
        }
    }

    io::CsvWriter csv;
    csv.comment("config_hash=" + h);
    csv.header({"point", "sweep_value", "method", "gamma", "morozov_satisfied", "discrepancy_sq",
                "threshold", "rrmse", "ssim", "params", "rank"});
    for (const ReconRow& r : rows) {
        csv.field(r.point).field(r.sweep_value).field(r.method).field(r.gamma);
        csv.field(static_cast<int>(r.satisfied)).field(r.discrepancy).field(r.threshold);
        csv.field(r.rrmse_v).field(r.ssim_v).field(static_cast<long long>(r.params));
        csv.field(r.rank);
        csv.end_row();
    }
    csv.save(dir / "report.csv");
    tim.save(dir / "timings.csv");
    std::cout << "reconstruct: report at " << (dir / "report.csv").string() << "\n";
    return any_abort ? 1 : 0;
}

int cmd_svd(const SvdArgs& args) {
    if (args.ranks.empty()) throw std::invalid_argument("svd: no ranks given");
    const GridImage img = load_grid_image(args.input);
    fs::create_directories(args.out_dir);
    const Eigen::VectorXd sigma = singular_spectrum(img.values);
    save_spectrum(sigma, args.out_dir / "spectrum.csv");
    const double total = img.values.norm();

    io::CsvWriter csv;
    if (!img.config_hash.empty()) csv.comment("config_hash=" + img.config_hash);
    csv.header({"rank", "params", "rrmse", "tail_rrmse"});
    for (int r : args.ranks) {
        const SemiseparableApprox ss = truncated_svd(img.values, r);
        GridImage out = img;
        out.values = ss.reconstruction();
        save_grid_image(out, args.out_dir / ("ss_" + io::format_int(r)));
        const double tail = std::sqrt(sigma.tail(sigma.size() - r).squaredNorm()) / total;
        csv.field(r).field(static_cast<long long>(ss.param_count()));
        csv.field(rrmse(out.values, img.values)).field(tail);
        csv.end_row();
    }
    csv.save(args.out_dir / "report.csv");
    std::cout << "svd: report at " << (args.out_dir / "report.csv").string() << "\n";
    return 0;
}

int cmd_render(const RenderArgs& args) {
    const GridImage img = load_grid_image(args.input);
    export_pgm_frames(img, args.out_dir, args.window_min, args.window_max);
    std::cout << "render: " << img.frames() << " frames -> " << args.out_dir.string() << "\n";
    return 0;
}

int cmd_metrics(const MetricsArgs& args) {
    const GridImage a = load_grid_image(args.file_a);
    const GridImage b = load_grid_image(args.file_b);
    if (!a.config_hash.empty() && !b.config_hash.empty() && a.config_hash != b.config_hash) {
        throw std::invalid_argument("metrics: config hash mismatch between inputs");
    }
    if (a.pixels_per_side != b.pixels_per_side || a.frames() != b.frames()) {
        throw std::invalid_argument("metrics: shape mismatch between inputs");
    }
    io::CsvWriter csv;
    csv.header({"metric", "value"});
    csv.field("rrmse").field(rrmse(a.values, b.values)).end_row();
    csv.field("ssim").field(ssim(a.values, b.values, a.pixels_per_side)).end_row();
    std::cout << csv.str();
    if (!args.out_csv.empty()) csv.save(args.out_csv);
    return 0;
}

}  // namespace dynfield
