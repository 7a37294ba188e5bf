#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dynfield/sinogram.hpp"
#include "dynfield/sparse_crt.hpp"

namespace dynfield {

enum class Regularizer { SpaceTimeTv, Nuclear };

/// One proximal-splitting reconstruction task over the pixel sequence
/// F (pixels x frames). step == 0 means "estimate a safe 1/L bound".
struct ProxProblem {
    const SparseCrtOperator* op = nullptr;
    const Sinogram* data = nullptr;
    double gamma = 0.0;
    Regularizer reg = Regularizer::SpaceTimeTv;
    double step = 0.0;
    int max_iter = 200;
    int tv_inner_iter = 20;
    double tv_time_weight = 1.0;

    void validate() const;
};

/// Isotropic total variation of the sequence: sum over voxels of
/// sqrt(dx^2 + dy^2 + (tw*dt)^2) with forward differences in index units
/// and a zero difference at each trailing boundary.
double tv_discrete(const Eigen::MatrixXd& values, int pixels_per_side, double time_weight = 1.0);

/// Approximate argmin_G 0.5*|G - F|^2 + weight * tv(G) by fast gradient
/// ascent on the dual ball. Never returns a point with a larger proximal
/// objective than F itself.
Eigen::MatrixXd prox_tv(const Eigen::MatrixXd& values, int pixels_per_side, double weight,
                        int inner_iter = 20, double time_weight = 1.0);

/// Exact prox of weight * (sum of singular values): soft-thresholds the
/// spectrum. Uses the frames x frames Gram eigendecomposition, so cost is
/// O(N*K^2) rather than a full SVD of the tall matrix.
Eigen::MatrixXd prox_nuclear(const Eigen::MatrixXd& values, double weight);

double nuclear_norm(const Eigen::MatrixXd& values);

/// 0.5/sigma^2 * sum_k |H_k f_k - d_k|^2 and its gradient in F.
double fidelity_value(const Eigen::MatrixXd& values, const SparseCrtOperator& op,
                      const Eigen::MatrixXd& data, double sigma);
Eigen::MatrixXd fidelity_grad(const Eigen::MatrixXd& values, const SparseCrtOperator& op,
                              const Eigen::MatrixXd& data, double sigma);

/// Unweighted squared residual sum_k |H_k f_k - d_k|^2.
double discrepancy_sq(const Eigen::MatrixXd& values, const SparseCrtOperator& op,
                      const Eigen::MatrixXd& data);

/// Power-iteration bound on the fidelity gradient Lipschitz constant,
/// i.e. max over frames of the top eigenvalue of H_k^T H_k, scaled by
/// 1/sigma^2 and a 1.05 safety factor.
double lipschitz_estimate(const SparseCrtOperator& op, double sigma, int iterations = 50,
                          std::uint64_t seed = 0x6c697073);

struct FistaRow {
    int iter = 0;
    double objective = 0.0;
    double fidelity = 0.0;
    double reg = 0.0;
    bool restarted = false;
};

struct FistaReport {
    std::vector<FistaRow> rows;
    int best_iter = 0;
    int restarts = 0;
    bool aborted = false;
    double wall_seconds = 0.0;

    void save_csv(const std::filesystem::path& path) const;
};

struct FistaResult {
    Eigen::MatrixXd values;
    FistaReport report;
};

/// Momentum proximal gradient descent with a function-value restart rule;
/// returns the best-objective iterate seen.
FistaResult fista(const ProxProblem& prob, const Eigen::MatrixXd& start);

/// Descending grid largest, largest/ratio, ... with `count` entries.
std::vector<double> geometric_grid(double largest, double ratio, int count);

/// sigma^2 times the measurement count: the discrepancy bound a
/// reconstruction of properly weighted noisy data should reach.
double morozov_threshold(const Sinogram& data);

struct MorozovRow {
    double gamma = 0.0;
    double discrepancy_sq = 0.0;
    bool satisfied = false;
};

template <class Recon>
struct MorozovResult {
    double gamma = 0.0;
    std::optional<Recon> recon;
    bool satisfied = false;
    std::vector<MorozovRow> rows;
};

/// Walks the descending grid and returns the first (largest) gamma whose
/// reconstruction meets discrepancy(recon) <= threshold. If none does,
/// the smallest gamma is returned with satisfied == false.
template <class Recon>
MorozovResult<Recon> morozov_search(const std::function<Recon(double)>& solve,
                                    const std::function<double(const Recon&)>& discrepancy,
                                    double threshold, const std::vector<double>& gamma_grid) {
    if (gamma_grid.empty()) throw std::invalid_argument("morozov_search: empty gamma grid");
    for (std::size_t i = 1; i < gamma_grid.size(); ++i) {
        if (!(gamma_grid[i] < gamma_grid[i - 1])) {
            throw std::invalid_argument("morozov_search: grid must be strictly descending");
        }
    }
    MorozovResult<Recon> out;
    for (double gamma : gamma_grid) {
        Recon r = solve(gamma);
        const double dsq = discrepancy(r);
        const bool ok = dsq <= threshold;
        out.rows.push_back({gamma, dsq, ok});
        out.gamma = gamma;
        out.recon = std::move(r);
        if (ok) {
            out.satisfied = true;
            break;
        }
    }
    return out;
}

}  // namespace dynfield
