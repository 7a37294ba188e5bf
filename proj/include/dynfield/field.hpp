#pragma once

#include <Eigen/Core>

#include "dynfield/grid_image.hpp"

namespace dynfield {

/// Anything that can be sampled as a dynamic object f(x, y, t).
///
/// Batch evaluation is the hot path for the integral operators; the
/// default forwards to the scalar form, implementations with a cheaper
/// vectorized path override it.
class SpaceTimeField {
  public:
    virtual ~SpaceTimeField() = default;
    virtual double eval(double x, double y, double t) const = 0;
    /// points: 3 x n (x; y; t), out resized to n.
    virtual void eval_batch(const Eigen::Matrix3Xd& points, Eigen::VectorXd& out) const {
        out.resize(points.cols());
        for (Eigen::Index i = 0; i < points.cols(); ++i)
            out[i] = eval(points(0, i), points(1, i), points(2, i));
    }
};

/// Piecewise-constant interpolant of a GridImage: value of the pixel
/// containing (x, y) at the frame whose time is nearest to t; zero
/// outside the grid.
class PixelField final : public SpaceTimeField {
  public:
    explicit PixelField(const GridImage& img) : img_(img) { img_.validate(); }
    double eval(double x, double y, double t) const override;

  private:
    int nearest_frame(double t) const;
    const GridImage& img_;
};

}  // namespace dynfield
