#include "dynfield/sparse_crt.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dynfield/io.hpp"

namespace dynfield {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void SparseCrtOperator::validate() const {
    if (pixels_per_side <= 0 || pixel_pitch <= 0.0) throw std::invalid_argument("bad operator grid");
    if (num_views <= 0 || num_rings <= 0) throw std::invalid_argument("bad operator geometry");
    if (frames.empty()) throw std::invalid_argument("operator has no frames");
    for (const auto& m : frames)
        if (m.rows() != rows() || m.cols() != cols())
            throw std::invalid_argument("operator frame shape mismatch");
}

SparseCrtOperator build_sparse_crt(const ImagingSystem& sys, int pixels_per_side,
                                   int subdivision_factor) {
    sys.validate();
    if (pixels_per_side <= 0) throw std::invalid_argument("pixel count must be positive");
    if (subdivision_factor < 1) throw std::invalid_argument("subdivision factor must be >= 1");

    SparseCrtOperator op;
    op.pixels_per_side = pixels_per_side;
    op.pixel_pitch = sys.fov_size_L / pixels_per_side;
    op.num_views = sys.num_views;
    op.num_rings = sys.num_rings;
    op.system_hash = io::to_hex(sys.hash());
    op.subdivision_factor = subdivision_factor;
    op.frames.reserve(static_cast<std::size_t>(sys.num_frames));

    const double half = 0.5 * sys.fov_size_L;
    const double max_step = op.pixel_pitch / subdivision_factor;
    const std::vector<double> radii = ring_radii(sys);

    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < sys.num_frames; ++k) {
        trips.clear();
        for (int view = 0; view < sys.num_views; ++view) {
            const auto sensor = sensor_position(sys, k, view);
            for (int ring = 0; ring < sys.num_rings; ++ring) {
                const double l = radii[static_cast<std::size_t>(ring)];
                const int m = view * sys.num_rings + ring;
                const long nsub =
                    std::max<long>(8, static_cast<long>(std::ceil(kTwoPi * l / max_step)));
                const double seg = kTwoPi * l / static_cast<double>(nsub);
                for (long c = 0; c < nsub; ++c) {
                    const double phi = kTwoPi * (static_cast<double>(c) + 0.5) / static_cast<double>(nsub);
                    const double x = sensor[0] + l * std::cos(phi);
                    const double y = sensor[1] + l * std::sin(phi);
                    if (x < -half || x >= half || y < -half || y >= half) continue;
                    const int ix = static_cast<int>((x + half) / op.pixel_pitch);
                    const int iy = static_cast<int>((y + half) / op.pixel_pitch);
                    const int n = iy * pixels_per_side + ix;
                    trips.emplace_back(m, n, seg);
                }
            }
        }
        Eigen::SparseMatrix<double> h(op.rows(), op.cols());
        h.setFromTriplets(trips.begin(), trips.end());
        h.makeCompressed();
        op.frames.push_back(std::move(h));
    }
    return op;
}

Eigen::VectorXd sparse_apply(const SparseCrtOperator& op, const GridImage& img, int frame) {
    op.validate();
    if (frame < 0 || frame >= static_cast<int>(op.frames.size()))
        throw std::out_of_range("frame index out of range");
    if (img.pixels_per_side != op.pixels_per_side || frame >= img.frames())
        throw std::invalid_argument("image does not match operator grid");
    return op.frames[static_cast<std::size_t>(frame)] * img.values.col(frame);
}

Sinogram sparse_apply_all(const SparseCrtOperator& op, const GridImage& img) {
    op.validate();
    Sinogram s;
    s.num_views = op.num_views;
    s.num_rings = op.num_rings;
    s.system_hash = op.system_hash;
    s.data.resize(op.rows(), static_cast<Eigen::Index>(op.frames.size()));
    for (int k = 0; k < static_cast<int>(op.frames.size()); ++k) s.data.col(k) = sparse_apply(op, img, k);
    return s;
}

Eigen::VectorXd sparse_adjoint(const SparseCrtOperator& op, const Eigen::VectorXd& data, int frame) {
    op.validate();
    if (frame < 0 || frame >= static_cast<int>(op.frames.size()))
        throw std::out_of_range("frame index out of range");
    if (data.size() != op.rows()) throw std::invalid_argument("data length does not match operator");
    return op.frames[static_cast<std::size_t>(frame)].transpose() * data;
}

void save_operator(const SparseCrtOperator& op, const std::filesystem::path& path) {
    op.validate();
    io::TextHeader h;
    h.set("format", "sparsecrt/1");
    h.set("frames", static_cast<long long>(op.frames.size()));
    h.set("pixels_per_side", op.pixels_per_side);
    h.set("pixel_pitch", op.pixel_pitch);
    h.set("views", op.num_views);
    h.set("rings", op.num_rings);
    h.set("system_hash", op.system_hash.empty() ? "none" : op.system_hash);
    h.set("subdivision_factor", op.subdivision_factor);
    auto os = io::open_out(path, true);
    h.write(os);
    for (const auto& m : op.frames) {
        const std::int64_t nnz = m.nonZeros();
        io::write_i64(os, &nnz, 1);
        std::vector<std::int64_t> idx(static_cast<std::size_t>(m.cols()) + 1);
        for (Eigen::Index c = 0; c <= m.cols(); ++c)
            idx[static_cast<std::size_t>(c)] = m.outerIndexPtr()[c];
        io::write_i64(os, idx.data(), idx.size());
        idx.resize(static_cast<std::size_t>(nnz));
        for (std::int64_t i = 0; i < nnz; ++i)
            idx[static_cast<std::size_t>(i)] = m.innerIndexPtr()[i];
        io::write_i64(os, idx.data(), idx.size());
        io::write_f64(os, m.valuePtr(), static_cast<std::size_t>(nnz));
    }
    if (!os) throw std::runtime_error("failed to write operator: " + path.string());
}

SparseCrtOperator load_operator(const std::filesystem::path& path) {
    auto is = io::open_in(path, true);
    const io::TextHeader h = io::TextHeader::read(is);
    if (h.get("format") != "sparsecrt/1")
        throw std::runtime_error("not an operator file: " + path.string());
    SparseCrtOperator op;
    op.pixels_per_side = static_cast<int>(h.get_int("pixels_per_side"));
    op.pixel_pitch = h.get_double("pixel_pitch");
    op.num_views = static_cast<int>(h.get_int("views"));
    op.num_rings = static_cast<int>(h.get_int("rings"));
    op.system_hash = h.get("system_hash") == "none" ? "" : h.get("system_hash");
    op.subdivision_factor = static_cast<int>(h.get_int("subdivision_factor"));
    const long frames = h.get_int("frames");
    op.frames.reserve(static_cast<std::size_t>(frames));
    for (long k = 0; k < frames; ++k) {
        std::int64_t nnz = 0;
        io::read_i64(is, &nnz, 1);
        std::vector<std::int64_t> outer(static_cast<std::size_t>(op.cols()) + 1);
        io::read_i64(is, outer.data(), outer.size());
        std::vector<std::int64_t> inner(static_cast<std::size_t>(nnz));
        io::read_i64(is, inner.data(), inner.size());
        std::vector<double> vals(static_cast<std::size_t>(nnz));
        io::read_f64(is, vals.data(), vals.size());

        Eigen::SparseMatrix<double> m(op.rows(), op.cols());
        m.reserve(Eigen::VectorXi::Constant(op.cols(), 1));
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(nnz));
        for (Eigen::Index c = 0; c < op.cols(); ++c)
            for (std::int64_t i = outer[static_cast<std::size_t>(c)];
                 i < outer[static_cast<std::size_t>(c) + 1]; ++i)
                trips.emplace_back(static_cast<int>(inner[static_cast<std::size_t>(i)]),
                                   static_cast<int>(c), vals[static_cast<std::size_t>(i)]);
        m.setFromTriplets(trips.begin(), trips.end());
        m.makeCompressed();
        op.frames.push_back(std::move(m));
    }
    if (!is) throw std::runtime_error("truncated operator file: " + path.string());
    op.validate();
    return op;
}

SparseCrtOperator load_or_build(const ImagingSystem& sys, int pixels_per_side,
                                const std::filesystem::path& cache_dir) {
    const std::string name =
        "crt_" + io::to_hex(sys.hash()) + "_" + io::format_int(pixels_per_side) + ".op";
    const std::filesystem::path path = cache_dir / name;
    if (std::filesystem::exists(path)) {
        SparseCrtOperator op = load_operator(path);
        if (op.system_hash == io::to_hex(sys.hash()) && op.pixels_per_side == pixels_per_side) return op;
    }
    SparseCrtOperator op = build_sparse_crt(sys, pixels_per_side);
    save_operator(op, path);
    return op;
}

}  // namespace dynfield
