#include "dynfield/field.hpp"

#include <cmath>

namespace dynfield {

int PixelField::nearest_frame(double t) const {
    const auto& ts = img_.times;
    if (ts.size() == 1) return 0;
    // Frame times are uniform and increasing.
    const double dt = ts[1] - ts[0];
    const long k = std::lround((t - ts[0]) / dt);
    if (k < 0) return 0;
    if (k >= static_cast<long>(ts.size())) return static_cast<int>(ts.size()) - 1;
    return static_cast<int>(k);
}

double PixelField::eval(double x, double y, double t) const {
    const long n = img_.pixel_index(x, y);
    if (n < 0) return 0.0;
    return img_.values(n, nearest_frame(t));
}

}  // namespace dynfield
