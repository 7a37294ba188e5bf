#include "dynfield/sinogram.hpp"

#include <stdexcept>

#include "dynfield/io.hpp"
#include "dynfield/rng.hpp"

namespace dynfield {

void Sinogram::validate() const {
    if (num_views <= 0 || num_rings <= 0) throw std::invalid_argument("empty sinogram geometry");
    if (data.rows() != static_cast<Eigen::Index>(num_views) * num_rings)
        throw std::invalid_argument("sinogram row count != views * rings");
    if (data.cols() < 1) throw std::invalid_argument("sinogram needs at least one frame");
    if (sigma < 0.0) throw std::invalid_argument("negative noise level");
}

Sinogram make_sinogram(const ImagingSystem& sys) {
    Sinogram s;
    s.num_views = sys.num_views;
    s.num_rings = sys.num_rings;
    s.data = Eigen::MatrixXd::Zero(sys.measurements_per_frame(), sys.num_frames);
    s.system_hash = io::to_hex(sys.hash());
    return s;
}

Sinogram add_noise(const Sinogram& clean, double relative_noise, std::uint64_t seed) {
    clean.validate();
    if (relative_noise < 0.0) throw std::invalid_argument("negative relative noise");
    Sinogram out = clean;
    const double sigma = relative_noise * clean.data.cwiseAbs().maxCoeff();
    out.sigma = sigma;
    if (sigma == 0.0) return out;
    for (int k = 0; k < clean.num_frames(); ++k)
        for (Eigen::Index m = 0; m < clean.data.rows(); ++m)
            out.data(m, k) += sigma * counter_normal(seed, static_cast<std::uint64_t>(k),
                                                     static_cast<std::uint64_t>(m));
    return out;
}

void save_sinogram(const Sinogram& s, const std::filesystem::path& path) {
    s.validate();
    io::TextHeader h;
    h.set("format", "sinogram/1");
    h.set("frames", s.num_frames());
    h.set("views", s.num_views);
    h.set("rings", s.num_rings);
    h.set("sigma", s.sigma);
    h.set("system_hash", s.system_hash.empty() ? "none" : s.system_hash);
    h.set("config_hash", s.config_hash.empty() ? "none" : s.config_hash);
    auto os = io::open_out(path, true);
    h.write(os);
    io::write_f64(os, s.data.data(), static_cast<std::size_t>(s.data.size()));
    if (!os) throw std::runtime_error("failed to write sinogram: " + path.string());
}

Sinogram load_sinogram(const std::filesystem::path& path) {
    auto is = io::open_in(path, true);
    const io::TextHeader h = io::TextHeader::read(is);
    if (h.get("format") != "sinogram/1")
        throw std::runtime_error("not a sinogram file: " + path.string());
    Sinogram s;
    s.num_views = static_cast<int>(h.get_int("views"));
    s.num_rings = static_cast<int>(h.get_int("rings"));
    s.sigma = h.get_double("sigma");
    s.system_hash = h.get("system_hash") == "none" ? "" : h.get("system_hash");
    if (h.has("config_hash") && h.get("config_hash") != "none") s.config_hash = h.get("config_hash");
    const long frames = h.get_int("frames");
    s.data.resize(static_cast<Eigen::Index>(s.num_views) * s.num_rings, frames);
    io::read_f64(is, s.data.data(), static_cast<std::size_t>(s.data.size()));
    if (!is) throw std::runtime_error("truncated sinogram: " + path.string());
    s.validate();
    return s;
}

}  // namespace dynfield
