#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "dynfield/field.hpp"
#include "dynfield/geometry.hpp"
#include "dynfield/sinogram.hpp"

namespace dynfield {

/// Midpoint-rule sample set for every arc of one frame: circles around
/// each active sensor position, one per ring radius, sampled at Q equally
/// spaced angles with the samples falling outside the imaging square
/// dropped (their weight is zero). Points carry the frame time on the
/// third row; `arc_of` is nondecreasing so each arc's points form one
/// contiguous run.
struct FrameQuadrature {
    Eigen::Matrix3Xd points;
    Eigen::VectorXd weights;   ///< 2*pi*l / Q for the point's ring radius l
    std::vector<int> arc_of;   ///< measurement index view*I + ring per point
    int arcs_total = 0;

    Eigen::Index size() const { return points.cols(); }
};

/// q_override = 0 uses the system's quadrature setting.
FrameQuadrature frame_quadrature(const ImagingSystem& sys, int frame, int q_override = 0);

/// Weighted per-arc sums of field samples; length fq.arcs_total.
Eigen::VectorXd apply_quadrature(const SpaceTimeField& field, const FrameQuadrature& fq);

/// One frame of the continuous-to-discrete transform.
Eigen::VectorXd crt_apply_field(const SpaceTimeField& field, const ImagingSystem& sys, int frame,
                                int q_override = 0);

/// All frames; sigma = 0 in the result.
Sinogram crt_apply_field_all(const SpaceTimeField& field, const ImagingSystem& sys,
                             int q_override = 0);

/// Standalone arc integral of a static function with the same midpoint
/// rule, for arbitrary sensor positions: sum over q = 1..Q of
/// (2*pi*radius/Q) * f(p_q) for the samples p_q inside the box.
double arc_integrate(const std::function<double(double, double)>& f,
                     const Eigen::Vector2d& sensor, double radius, int q, const DomainBox& box);

}  // namespace dynfield
