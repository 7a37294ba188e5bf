#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dynfield/crt.hpp"
#include "dynfield/grid_image.hpp"
#include "dynfield/pounet.hpp"
#include "dynfield/sinogram.hpp"

namespace dynfield {

/// Knobs of the alternating block solver. Learning rates decay
/// geometrically per epoch so the cumulative factor over the whole run is
/// lr_total_decay; the auxiliary weights decay to 1e-3 of their start
/// value across the first aux_decay_epochs of every inner solve and are
/// zero afterwards.
struct TrainConfig {
    int outer_max_iter = 20;
    int inner_epochs = 20;
    int batch_frames = 10;
    double lr_c0 = 1e-2;
    double lr_eta0 = 1e-4;
    double lr_total_decay = 1e-3;
    double rho0 = -1.0;  ///< auto (< 0): 1e-4 / sigma_eff^2
    double tau0 = 1.0;
    int aux_decay_epochs = 10;
    double q = 0.5;
    double eps_q = 1e-2;
    double tv_gamma = 0.0;
    int tv_samples = 1024;
    bool tv_include_time = true;
    int quad_q = 0;  ///< training-side arc quadrature override, 0 = system setting
    int init_outer_iter = 3;  ///< outer iterations of the static warm start
    std::uint64_t seed = 0;
    SirenSpec arch;
    int coeff_cache_mb = 512;  ///< budget for the per-arc feature cache in update_C

    void validate() const;
};

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState(Eigen::Index n, double lr0)
        : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)), lr(lr0) {}
};

/// Bias-corrected update in place; throws on non-finite gradients.
void adam_step(AdamState& st, Eigen::VectorXd& params, const Eigen::VectorXd& grads);

/// Auxiliary-weight schedule: epoch is 1-based within one inner solve.
double aux_weight_at(double aux0, int decay_epochs, int epoch);

/// A reconstruction (or embedding) task in residual form: per-frame data
/// grouped into fixed cyclic frame batches. Batch residual terms carry
/// the training weight (K / |K_b|) / sigma_eff^2.
struct TrainingProblem {
    std::vector<GroupedResidualTerm> batches;
    std::vector<int> batch_sizes;  ///< frames per batch
    int frames_total = 0;
    double sigma_eff = 1.0;
    double volume = 1.0;  ///< |Omega_T|, scales the q-norm penalty

    Eigen::Index residual_count() const;
    /// Full-data fidelity (1 / 2 sigma^2) * sum of squared residuals.
    double full_fidelity(const PouNet& f) const;
};

/// Arc-quadrature fidelity against a sinogram. static_time replaces every
/// sample time by T/2, turning the task into the stacked static problem
/// used for initialization.
TrainingProblem make_training_problem(const Sinogram& d, const ImagingSystem& sys,
                                      const TrainConfig& cfg, bool static_time);

/// Pointwise fidelity against a reference image sequence (no imaging
/// operator); sigma_eff = 1 and unit sample weights.
TrainingProblem make_embedding_problem(const GridImage& reference, const TrainConfig& cfg);

/// --- Spec'd scalar estimators ------------------------------------------

double data_fidelity_batch(const PouNet& f, const Sinogram& d, const ImagingSystem& sys,
                           const std::vector<int>& batch_frames, int quad_q = 0);
double stochastic_tv(const PouNet& f, int n_samples, std::uint64_t seed, bool include_time);
double qnorm_penalty(const PouNet& f, int n_samples, double q, double eps_q, std::uint64_t seed);

/// --- Inner solves --------------------------------------------------------

/// Per-solve schedule context: where this solve's epochs sit in the global
/// learning-rate decay and the seeds for its Monte Carlo terms.
struct SolveSchedule {
    double aux0 = 0.0;           ///< rho0 (coefficients) or tau0 (partition)
    int aux_decay_epochs = 10;
    double lr0 = 1e-2;
    double lr_epoch_factor = 1.0;
    int lr_epoch_offset = 0;
    std::uint64_t tv_seed = 0;
};

/// inner_epochs Adam epochs on C with eta frozen; one step per batch.
void update_C(PouNet& f, const TrainingProblem& prob, const TrainConfig& cfg,
              const SolveSchedule& sched, AdamState& adam);

/// inner_epochs Adam epochs on eta with C frozen; q-norm penalty active.
void update_eta(PouNet& f, const TrainingProblem& prob, const TrainConfig& cfg,
                const SolveSchedule& sched, AdamState& adam);

/// --- Outer driver ---------------------------------------------------------

struct TrainRow {
    int iter = 0;  ///< 0 is the pre-training state
    double j_full = 0.0;
    double fidelity = 0.0;
    double tv = 0.0;
    double rho_term = 0.0;
    double tau_term = 0.0;
    double lr_c = 0.0;
    double lr_eta = 0.0;
};

struct TrainReport {
    std::vector<TrainRow> rows;
    std::vector<double> wall_seconds;  ///< per row; kept out of the deterministic CSV
    int best_iter = 0;
    bool aborted = false;
    std::string abort_reason;

    void save_csv(const std::filesystem::path& path) const;
    void save_timings(const std::filesystem::path& path) const;
};

/// Alternates update_C / update_eta from the given starting field, logging
/// the comparable objective (full fidelity + gamma * TV on a frozen sample
/// set) per outer iteration, stopping early when it fails to decrease, and
/// returning the best logged iterate. phase_tag separates the Monte Carlo
/// streams of nested runs under one seed.
PouNet run_training(const TrainingProblem& prob, const TrainConfig& cfg, const PouNet& start,
                    TrainReport& report, std::uint64_t phase_tag,
                    const std::filesystem::path& checkpoint_dir = {});

/// Static warm start: stacked all-frame data against the field frozen at
/// t = T/2, spatial-only TV, init_outer_iter outer iterations.
PouNet init_static(const Sinogram& d, const ImagingSystem& sys, const PouNet& start,
                   const TrainConfig& cfg, TrainReport& report);

struct TrainResult {
    PouNet field;
    TrainReport report;
};

/// Full pipeline: fresh-initialized field, static warm start, then the
/// dynamic solve. The report carries rows of the dynamic phase, with
/// iter = 0 logging the objective of the freshly initialized field.
TrainResult reconstruct_nf(const Sinogram& d, const ImagingSystem& sys, const TrainConfig& cfg,
                           const std::filesystem::path& checkpoint_dir = {});

/// Same driver on the pointwise embedding task.
TrainResult reconstruct_embedding(const GridImage& reference, const DomainBox& domain,
                                  const TrainConfig& cfg);

}  // namespace dynfield
