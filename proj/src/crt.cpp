#include "dynfield/crt.hpp"

#include <cmath>
#include <stdexcept>

namespace dynfield {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

FrameQuadrature frame_quadrature(const ImagingSystem& sys, int frame, int q_override) {
    sys.validate();
    if (frame < 0 || frame >= sys.num_frames) throw std::out_of_range("frame index out of range");
    const int q = q_override > 0 ? q_override : sys.quadrature_points_Q;
    const DomainBox box = domain_of(sys);
    const std::vector<double> radii = ring_radii(sys);
    const std::vector<double> times = frame_times(sys);

    FrameQuadrature fq;
    fq.arcs_total = sys.num_views * sys.num_rings;
    const Eigen::Index cap = static_cast<Eigen::Index>(fq.arcs_total) * q;
    fq.points.resize(3, cap);
    fq.weights.resize(cap);
    fq.arc_of.reserve(static_cast<std::size_t>(cap));

    Eigen::Index at = 0;
    for (int view = 0; view < sys.num_views; ++view) {
        const auto sensor = sensor_position(sys, frame, view);
        for (int ring = 0; ring < sys.num_rings; ++ring) {
            const double l = radii[static_cast<std::size_t>(ring)];
            const double h = kTwoPi * l / q;
            const int arc = view * sys.num_rings + ring;
            for (int qi = 1; qi <= q; ++qi) {
                const double phi = kTwoPi * qi / q;
                const double x = sensor[0] + l * std::cos(phi);
                const double y = sensor[1] + l * std::sin(phi);
                if (!box.contains(x, y)) continue;
                fq.points(0, at) = x;
                fq.points(1, at) = y;
                fq.points(2, at) = times[static_cast<std::size_t>(frame)];
                fq.weights[at] = h;
                fq.arc_of.push_back(arc);
                ++at;
            }
        }
    }
    fq.points.conservativeResize(3, at);
    fq.weights.conservativeResize(at);
    return fq;
}

Eigen::VectorXd apply_quadrature(const SpaceTimeField& field, const FrameQuadrature& fq) {
    Eigen::VectorXd samples;
    field.eval_batch(fq.points, samples);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(fq.arcs_total);
    for (Eigen::Index i = 0; i < fq.size(); ++i)
        out[fq.arc_of[static_cast<std::size_t>(i)]] += fq.weights[i] * samples[i];
    return out;
}

Eigen::VectorXd crt_apply_field(const SpaceTimeField& field, const ImagingSystem& sys, int frame,
                                int q_override) {
    return apply_quadrature(field, frame_quadrature(sys, frame, q_override));
}

Sinogram crt_apply_field_all(const SpaceTimeField& field, const ImagingSystem& sys, int q_override) {
    Sinogram s = make_sinogram(sys);
    for (int k = 0; k < sys.num_frames; ++k)
        s.data.col(k) = crt_apply_field(field, sys, k, q_override);
    return s;
}

double arc_integrate(const std::function<double(double, double)>& f,
                     const Eigen::Vector2d& sensor, double radius, int q, const DomainBox& box) {
    if (q < 1 || radius <= 0.0) throw std::invalid_argument("bad arc quadrature parameters");
    const double h = kTwoPi * radius / q;
    double acc = 0.0;
    for (int qi = 1; qi <= q; ++qi) {
        const double phi = kTwoPi * qi / q;
        const double x = sensor[0] + radius * std::cos(phi);
        const double y = sensor[1] + radius * std::sin(phi);
        if (box.contains(x, y)) acc += h * f(x, y);
    }
    return acc;
}

}  // namespace dynfield
