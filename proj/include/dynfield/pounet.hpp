#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "dynfield/basis.hpp"
#include "dynfield/field.hpp"
#include "dynfield/geometry.hpp"

namespace dynfield {

/// Architecture of the partition network: a sine-activated MLP from
/// normalized (x, y, t) to P logits, followed by a softmax. `depth` counts
/// sine layers; the first one scales its pre-activation by omega_first,
/// deeper ones by omega_hidden.
struct SirenSpec {
    int width = 140;
    int depth = 4;
    int partitions = 40;
    double omega_first = 30.0;
    double omega_hidden = 1.0;

    void validate() const;
};

/// Weights of the partition network. Layer l maps:
///   l = 0:      A0 = omega_first * (W[0] x + b[0]),  Z0 = sin(A0)
///   0 < l < D:  Al = omega_hidden * (W[l] Z + b[l]), Zl = sin(Al)
///   l = D:      U  = W[D] Z + b[D],                  Psi = softmax(U)
struct PartitionNet {
    SirenSpec spec;
    std::vector<Eigen::MatrixXd> W;  ///< D+1 matrices
    std::vector<Eigen::VectorXd> b;

    long param_count() const;
};

/// Field model: Phi(x) = Psi(x)^T C B(x) with Psi the softmax partition,
/// C the per-partition coefficient matrix and B the shared polynomial
/// features, all on normalized coordinates. Public evaluation takes
/// physical coordinates inside the space-time box.
struct PouNet final : public SpaceTimeField {
    PartitionNet net;
    Eigen::MatrixXd C;  ///< P x M
    PolyBasis basis = PolyBasis::tensor_product();
    DomainBox domain;

    long param_count() const { return net.param_count() + C.size(); }

    /// Partition values at a physical point; non-negative, sums to one.
    Eigen::VectorXd eval_pou(double x, double y, double t) const;

    double eval(double x, double y, double t) const override;
    void eval_batch(const Eigen::Matrix3Xd& points, Eigen::VectorXd& out) const override;

    /// Physical-coordinate gradient (d/dx, d/dy, d/dt) of the field.
    std::array<double, 3> eval_grad(double x, double y, double t) const;

    void validate() const;
};

/// Sine-layer preserving initialization: first-layer weights uniform in
/// [-1/(in_dim), 1/(in_dim)], deeper sine layers uniform in
/// [-sqrt(6/width)/omega_hidden, +...], output layer uniform in
/// [+-sqrt(6/width)], coefficients uniform in [-0.01, 0.01]. Deterministic
/// in the seed.
PouNet init_siren(const SirenSpec& spec, const PolyBasis& basis, const DomainBox& domain,
                  std::uint64_t seed);

/// --- Differentiation engine -------------------------------------------
///
/// Fixed-architecture forward / reverse passes in double precision. The
/// tangent blocks carry d/d(normalized input) for the three axes stacked
/// as [x | y | t] column blocks of width n.

struct BatchWork {
    Eigen::Matrix3Xd Xn;               ///< normalized inputs, 3 x n
    std::vector<Eigen::MatrixXd> A;    ///< sine arguments per layer
    std::vector<Eigen::MatrixXd> Z;    ///< sine outputs per layer
    Eigen::MatrixXd U;                 ///< logits P x n
    Eigen::MatrixXd Psi;               ///< partitions P x n
    Eigen::MatrixXd B;                 ///< features M x n
    Eigen::MatrixXd CB;                ///< C * B, P x n
    Eigen::RowVectorXd phi;            ///< field values 1 x n

    bool has_tangent = false;
    std::vector<Eigen::MatrixXd> dA;   ///< width x 3n per layer
    std::vector<Eigen::MatrixXd> dZ;
    Eigen::MatrixXd dU;                ///< P x 3n
    Eigen::MatrixXd dPsi;              ///< P x 3n
    Eigen::MatrixXd Bg;                ///< M x 3n feature derivatives
    Eigen::MatrixXd CdB;               ///< P x 3n, C * Bg blocks
    Eigen::MatrixXd gradn;             ///< 3 x n field gradient, normalized coords

    Eigen::Index size() const { return Xn.cols(); }
};

/// Runs the network on normalized points; with_tangent additionally
/// computes input-derivative blocks and the field gradient.
void pounet_forward(const PouNet& f, const Eigen::Matrix3Xd& Xn, BatchWork& work, bool with_tangent);

/// Physical points -> normalized coordinates, columnwise.
Eigen::Matrix3Xd normalize_batch(const DomainBox& box, const Eigen::Matrix3Xd& phys);

/// Parameter cotangents, same shapes as the weights.
struct ParamGrads {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
    Eigen::MatrixXd dC;

    static ParamGrads zeros_like(const PouNet& f);
    void set_zero();
};

/// Seeds for the reverse pass: each entry may be empty (size 0) when the
/// corresponding output was not used by the loss.
struct SeedSet {
    Eigen::RowVectorXd phi;   ///< dL/dphi, 1 x n
    Eigen::MatrixXd gradn;    ///< dL/d(gradn), 3 x n
    Eigen::MatrixXd psi;      ///< dL/dPsi, P x n
};

/// Accumulates dL/d(eta) (when eta_grads) and dL/dC into `out`. Requires
/// the workspace of a preceding forward pass; gradn seeds require the
/// tangent blocks.
void pounet_backward(const PouNet& f, const BatchWork& work, const SeedSet& seeds, bool eta_grads,
                     ParamGrads& out);

/// --- Losses over the supported primitives ------------------------------

/// 0.5 * weight * sum_g ( sum_{i: group[i]==g} h[i]*Phi(pts_i)  -  d[g] )^2
struct GroupedResidualTerm {
    Eigen::Matrix3Xd pts;     ///< physical coordinates
    Eigen::VectorXd h;        ///< per-point quadrature weight
    std::vector<int> group;   ///< group index per point; points of a group are contiguous
    Eigen::VectorXd d;        ///< per-group data
    double weight = 1.0;
};

/// gamma * mean_i sqrt(|grad_phys Phi(pts_i)|^2 + delta^2); time axis
/// excluded when include_time is false.
struct TvSampleTerm {
    Eigen::Matrix3Xd pts;
    double gamma = 0.0;
    double delta = 1e-8;
    bool include_time = true;
};

/// tau * volume * mean_i sum_p (Psi_p(pts_i) + eps)^q
struct QnormTerm {
    Eigen::Matrix3Xd pts;
    double tau = 0.0;
    double q = 0.5;
    double eps = 1e-2;
    double volume = 1.0;
};

struct LossSpec {
    std::vector<GroupedResidualTerm> residual_terms;
    std::vector<TvSampleTerm> tv_terms;
    std::vector<QnormTerm> qnorm_terms;
    double frobenius_weight = 0.0;  ///< 0.5 * w * |C|_F^2

    void validate(const PouNet& f) const;
};

double loss_value(const PouNet& f, const LossSpec& spec);

/// Returns the loss and accumulates exact gradients (eta optionally
/// skipped; dC always filled).
double loss_and_grads(const PouNet& f, const LossSpec& spec, bool eta_grads, ParamGrads& out);

/// --- Flat parameter views (optimizer order) ----------------------------
///
/// Order: W[0] row-major, b[0], W[1], b[1], ..., W[D], b[D].
Eigen::VectorXd eta_to_vector(const PartitionNet& net);
void eta_from_vector(const Eigen::VectorXd& v, PartitionNet& net);
Eigen::VectorXd eta_grads_to_vector(const PouNet& f, const ParamGrads& g);

/// --- Persistence --------------------------------------------------------
///
/// Single-file checkpoint: text header (architecture, basis exponents,
/// domain box, frequency scales) followed by a little-endian float64 blob
/// of eta then C. Round-trips bit-exactly.
void save_pounet(const PouNet& f, const std::filesystem::path& path, const std::string& config_hash = "");
PouNet load_pounet(const std::filesystem::path& path);

}  // namespace dynfield
