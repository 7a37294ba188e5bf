#include "dynfield/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "dynfield/io.hpp"

namespace dynfield {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

void check_keys(const json& obj, const char* section, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) bad(std::string(section) + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) bad("unknown key '" + it.key() + "' in " + section);
    }
}

template <class T>
void maybe(const json& obj, const char* key, T& value) {
    if (obj.contains(key)) value = obj.at(key).get<T>();
}

double rad_to_deg(double rad) { return rad * 180.0 / M_PI; }

}  // namespace

void ExperimentConfig::validate() const {
    if (profile != "desk" && profile != "paper") bad("profile must be desk or paper");
    if (method != "all" && method != "nf-tv" && method != "pw-tv" && method != "pw-nn") {
        bad("method must be nf-tv, pw-tv, pw-nn or all");
    }
    if (sweep_axis != "none" && sweep_axis != "views" && sweep_axis != "noise" &&
        sweep_axis != "rank") {
        bad("sweep axis must be none, views, noise or rank");
    }
    if (sweep_axis != "none" && sweep_values.empty()) bad("sweep values empty");
    for (double v : sweep_values) {
        if (sweep_axis == "views" || sweep_axis == "rank") {
            if (v < 1 || v != std::floor(v)) bad("sweep values must be positive integers");
        } else if (sweep_axis == "noise" && v < 0) {
            bad("noise sweep values must be >= 0");
        }
    }
    if (generation_supersample < 1) bad("generation supersample must be >= 1");
    if (generation_subdivision < 1) bad("generation subdivision must be >= 1");
    if (reference_supersample < 1) bad("reference supersample must be >= 1");
    if (!(morozov_largest > 0) || !(morozov_ratio > 1) || morozov_count < 1) {
        bad("morozov grid needs largest > 0, ratio > 1, count >= 1");
    }
    if (prox_step < 0 || prox_max_iter < 1 || prox_tv_inner < 1 || prox_tv_time_weight < 0) {
        bad("prox settings out of range");
    }
    if (ss_ranks.empty()) bad("ss_ranks empty");
    for (int r : ss_ranks) {
        if (r < 1) bad("ss_ranks entries must be >= 1");
    }
    system.validate();
    train.validate();
}

std::string ExperimentConfig::canonical_json() const {
    json j;
    j["profile"] = profile;
    j["seed"] = seed;
    j["phantom_seed"] = phantom_seed;
    j["system"] = {
        {"fov_size", system.fov_size_L},
        {"pixels_per_side", system.pixels_per_side},
        {"aperture_radius", system.aperture_R},
        {"views", system.num_views},
        {"frames", system.num_frames},
        {"rings", system.num_rings},
        {"view_offset_deg", rad_to_deg(system.view_offset_rad)},
        {"total_time", system.total_time_T},
        {"quadrature_points", system.quadrature_points_Q},
        {"relative_noise", system.relative_noise},
    };
    j["generation"] = {
        {"supersample", generation_supersample},
        {"subdivision_factor", generation_subdivision},
    };
    j["reference_supersample"] = reference_supersample;
    j["method"] = method;
    j["train"] = {
        {"outer_max_iter", train.outer_max_iter},
        {"inner_epochs", train.inner_epochs},
        {"batch_frames", train.batch_frames},
        {"lr_c0", train.lr_c0},
        {"lr_eta0", train.lr_eta0},
        {"lr_total_decay", train.lr_total_decay},
        {"rho0", train.rho0},
        {"tau0", train.tau0},
        {"aux_decay_epochs", train.aux_decay_epochs},
        {"q", train.q},
        {"eps_q", train.eps_q},
        {"tv_gamma", train.tv_gamma},
        {"tv_samples", train.tv_samples},
        {"tv_include_time", train.tv_include_time},
        {"quad_q", train.quad_q},
        {"init_outer_iter", train.init_outer_iter},
        {"coeff_cache_mb", train.coeff_cache_mb},
        {"width", train.arch.width},
        {"depth", train.arch.depth},
        {"partitions", train.arch.partitions},
        {"omega_first", train.arch.omega_first},
        {"omega_hidden", train.arch.omega_hidden},
    };
    j["prox"] = {
        {"step", prox_step},
        {"max_iter", prox_max_iter},
        {"tv_inner_iter", prox_tv_inner},
        {"tv_time_weight", prox_tv_time_weight},
    };
    j["sweep"] = {{"axis", sweep_axis}, {"values", sweep_values}};
    j["morozov"] = {
        {"largest", morozov_largest},
        {"ratio", morozov_ratio},
        {"count", morozov_count},
    };
    j["ss_ranks"] = ss_ranks;
    json probes_j = json::array();
    for (const auto& p : probes) probes_j.push_back({p[0], p[1]});
    j["probes"] = probes_j;
    return j.dump(2) + "\n";
}

std::string ExperimentConfig::hash() const { return io::to_hex(io::fnv1a64(canonical_json())); }

TrainConfig desk_train_defaults() {
    TrainConfig t;
    t.outer_max_iter = 10;
    t.inner_epochs = 16;
    t.batch_frames = 8;
    t.lr_c0 = 0.2;
    t.lr_eta0 = 2e-2;
    t.lr_total_decay = 0.04;
    t.quad_q = 64;
    t.coeff_cache_mb = 2048;
    t.arch.width = 48;
    t.arch.depth = 3;
    t.arch.partitions = 32;
    t.arch.omega_first = 45.0;
    t.arch.omega_hidden = 2.0;
    return t;
}

TrainConfig paper_train_defaults() {
    TrainConfig t;
    t.outer_max_iter = 20;
    t.arch.width = 140;
    t.arch.depth = 4;
    t.arch.partitions = 40;
    return t;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        bad(e.what());
    }
    ExperimentConfig cfg;
    try {
        check_keys(j, "config",
                   {"profile", "seed", "phantom_seed", "out_dir", "system", "generation",
                    "reference_supersample", "method", "train", "prox", "sweep", "morozov",
                    "ss_ranks", "probes"});
        maybe(j, "profile", cfg.profile);
        if (cfg.profile == "desk") {
            cfg.system = desk_scale_system();
            cfg.train = desk_train_defaults();
        } else if (cfg.profile == "paper") {
            cfg.system = paper_scale_system();
            cfg.train = paper_train_defaults();
        } else {
            bad("profile must be desk or paper");
        }
        maybe(j, "seed", cfg.seed);
        maybe(j, "phantom_seed", cfg.phantom_seed);
        if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
        if (j.contains("system")) {
            const json& s = j.at("system");
            check_keys(s, "system",
                       {"fov_size", "pixels_per_side", "aperture_radius", "views", "frames",
                        "rings", "view_offset_deg", "total_time", "quadrature_points",
                        "relative_noise"});
            maybe(s, "fov_size", cfg.system.fov_size_L);
            maybe(s, "pixels_per_side", cfg.system.pixels_per_side);
            maybe(s, "aperture_radius", cfg.system.aperture_R);
            maybe(s, "views", cfg.system.num_views);
            maybe(s, "frames", cfg.system.num_frames);
            maybe(s, "rings", cfg.system.num_rings);
            if (s.contains("view_offset_deg")) {
                cfg.system.view_offset_rad =
                    view_offset_from_degrees(s.at("view_offset_deg").get<double>());
            }
            maybe(s, "total_time", cfg.system.total_time_T);
            maybe(s, "quadrature_points", cfg.system.quadrature_points_Q);
            maybe(s, "relative_noise", cfg.system.relative_noise);
        }
        if (j.contains("generation")) {
            const json& g = j.at("generation");
            check_keys(g, "generation", {"supersample", "subdivision_factor"});
            maybe(g, "supersample", cfg.generation_supersample);
            maybe(g, "subdivision_factor", cfg.generation_subdivision);
        }
        maybe(j, "reference_supersample", cfg.reference_supersample);
        maybe(j, "method", cfg.method);
        if (j.contains("train")) {
            const json& t = j.at("train");
            check_keys(t, "train",
                       {"outer_max_iter", "inner_epochs", "batch_frames", "lr_c0", "lr_eta0",
                        "lr_total_decay", "rho0", "tau0", "aux_decay_epochs", "q", "eps_q",
                        "tv_gamma", "tv_samples", "tv_include_time", "quad_q", "init_outer_iter",
                        "coeff_cache_mb", "width", "depth", "partitions", "omega_first",
                        "omega_hidden"});
            maybe(t, "outer_max_iter", cfg.train.outer_max_iter);
            maybe(t, "inner_epochs", cfg.train.inner_epochs);
            maybe(t, "batch_frames", cfg.train.batch_frames);
            maybe(t, "lr_c0", cfg.train.lr_c0);
            maybe(t, "lr_eta0", cfg.train.lr_eta0);
            maybe(t, "lr_total_decay", cfg.train.lr_total_decay);
            maybe(t, "rho0", cfg.train.rho0);
            maybe(t, "tau0", cfg.train.tau0);
            maybe(t, "aux_decay_epochs", cfg.train.aux_decay_epochs);
            maybe(t, "q", cfg.train.q);
            maybe(t, "eps_q", cfg.train.eps_q);
            maybe(t, "tv_gamma", cfg.train.tv_gamma);
            maybe(t, "tv_samples", cfg.train.tv_samples);
            maybe(t, "tv_include_time", cfg.train.tv_include_time);
            maybe(t, "quad_q", cfg.train.quad_q);
            maybe(t, "init_outer_iter", cfg.train.init_outer_iter);
            maybe(t, "coeff_cache_mb", cfg.train.coeff_cache_mb);
            maybe(t, "width", cfg.train.arch.width);
            maybe(t, "depth", cfg.train.arch.depth);
            maybe(t, "partitions", cfg.train.arch.partitions);
            maybe(t, "omega_first", cfg.train.arch.omega_first);
            maybe(t, "omega_hidden", cfg.train.arch.omega_hidden);
        }
        if (j.contains("prox")) {
            const json& p = j.at("prox");
            check_keys(p, "prox", {"step", "max_iter", "tv_inner_iter", "tv_time_weight"});
            maybe(p, "step", cfg.prox_step);
            maybe(p, "max_iter", cfg.prox_max_iter);
            maybe(p, "tv_inner_iter", cfg.prox_tv_inner);
            maybe(p, "tv_time_weight", cfg.prox_tv_time_weight);
        }
        if (j.contains("sweep")) {
            const json& s = j.at("sweep");
            check_keys(s, "sweep", {"axis", "values"});
            maybe(s, "axis", cfg.sweep_axis);
            maybe(s, "values", cfg.sweep_values);
        }
        if (j.contains("morozov")) {
            const json& m = j.at("morozov");
            check_keys(m, "morozov", {"largest", "ratio", "count"});
            maybe(m, "largest", cfg.morozov_largest);
            maybe(m, "ratio", cfg.morozov_ratio);
            maybe(m, "count", cfg.morozov_count);
        }
        maybe(j, "ss_ranks", cfg.ss_ranks);
        if (j.contains("probes")) {
            cfg.probes.clear();
            for (const auto& p : j.at("probes")) {
                if (!p.is_array() || p.size() != 2) bad("probes entries must be [x, y] pairs");
                cfg.probes.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            }
        }
    } catch (const json::exception& e) {
        bad(e.what());
    }
    cfg.train.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

void echo_config(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "config_echo.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write config echo in " + dir.string());
    out << cfg.canonical_json();
}

std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg) {
    const char* root = std::getenv("DYNFIELD_OUT_ROOT");
    if (root != nullptr && *root != '\0' && cfg.out_dir.is_relative()) {
        return std::filesystem::path(root) / cfg.out_dir;
    }
    return cfg.out_dir;
}

}  // namespace dynfield
