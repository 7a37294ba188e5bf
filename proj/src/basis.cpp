#include "dynfield/basis.hpp"

#include <algorithm>
#include <stdexcept>

namespace dynfield {

PolyBasis::PolyBasis(std::vector<PolyTerm> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw std::invalid_argument("PolyBasis: needs at least one term");
    for (const auto& t : terms_) {
        if (t.px < 0 || t.py < 0 || t.pt < 0) throw std::invalid_argument("PolyBasis: negative exponent");
        max_degree_ = std::max({max_degree_, t.px, t.py, t.pt});
    }
}

PolyBasis PolyBasis::tensor_product(int space_degree, int time_degree) {
    if (space_degree < 0 || time_degree < 0)
        throw std::invalid_argument("PolyBasis: degrees must be non-negative");
    std::vector<PolyTerm> terms;
    for (int d = 0; d <= space_degree; ++d) {
        for (int px = d; px >= 0; --px) {
            const int py = d - px;
            for (int pt = 0; pt <= time_degree; ++pt) terms.push_back({px, py, pt});
        }
    }
    return PolyBasis(std::move(terms));
}

namespace {
// powers(v) fills row p with v^p for p = 0..max_degree.
void fill_powers(const Eigen::RowVectorXd& v, int max_degree, Eigen::MatrixXd& powers) {
    powers.resize(max_degree + 1, v.size());
    powers.row(0).setOnes();
    for (int p = 1; p <= max_degree; ++p)
        powers.row(p) = powers.row(p - 1).cwiseProduct(v);
}
}  // namespace

void PolyBasis::eval(const Eigen::Matrix3Xd& pts, Eigen::MatrixXd& values) const {
    Eigen::MatrixXd px, py, pt;
    fill_powers(pts.row(0), max_degree_, px);
    fill_powers(pts.row(1), max_degree_, py);
    fill_powers(pts.row(2), max_degree_, pt);
    values.resize(size(), pts.cols());
    for (int m = 0; m < size(); ++m) {
        const auto& term = terms_[static_cast<std::size_t>(m)];
        values.row(m) = px.row(term.px).cwiseProduct(py.row(term.py)).cwiseProduct(pt.row(term.pt));
    }
}

void PolyBasis::eval_with_grad(const Eigen::Matrix3Xd& pts, Eigen::MatrixXd& values,
                               Eigen::MatrixXd& derivs) const {
    Eigen::MatrixXd px, py, pt;
    fill_powers(pts.row(0), max_degree_, px);
    fill_powers(pts.row(1), max_degree_, py);
    fill_powers(pts.row(2), max_degree_, pt);
    const Eigen::Index n = pts.cols();
    values.resize(size(), n);
    derivs.resize(size(), 3 * n);
    for (int m = 0; m < size(); ++m) {
        const auto& term = terms_[static_cast<std::size_t>(m)];
        const auto vx = px.row(term.px), vy = py.row(term.py), vt = pt.row(term.pt);
        values.row(m) = vx.cwiseProduct(vy).cwiseProduct(vt);
        derivs.block(m, 0, 1, n) =
            term.px == 0 ? Eigen::RowVectorXd::Zero(n)
                         : (term.px * px.row(term.px - 1).cwiseProduct(vy).cwiseProduct(vt)).eval();
        derivs.block(m, n, 1, n) =
            term.py == 0 ? Eigen::RowVectorXd::Zero(n)
                         : (term.py * py.row(term.py - 1).cwiseProduct(vx).cwiseProduct(vt)).eval();
        derivs.block(m, 2 * n, 1, n) =
            term.pt == 0 ? Eigen::RowVectorXd::Zero(n)
                         : (term.pt * pt.row(term.pt - 1).cwiseProduct(vx).cwiseProduct(vy)).eval();
    }
}

}  // namespace dynfield
