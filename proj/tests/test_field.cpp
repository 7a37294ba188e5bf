#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstring>

#include "dynfield/pounet.hpp"
#include "dynfield/rng.hpp"
#include "test_support.hpp"

using namespace dynfield;

namespace {

PouNet small_net(std::uint64_t seed, int partitions = 4, int width = 12, int depth = 2) {
    SirenSpec spec;
    spec.width = width;
    spec.depth = depth;
    spec.partitions = partitions;
    return init_siren(spec, PolyBasis::tensor_product(), DomainBox{1.45, 5.0}, seed);
}

Eigen::Matrix3Xd random_points(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::Matrix3Xd pts(3, n);
    for (int i = 0; i < n; ++i) {
        pts(0, i) = rng.uniform(-1.45, 1.45);
        pts(1, i) = rng.uniform(-1.45, 1.45);
        pts(2, i) = rng.uniform(0.0, 5.0);
    }
    return pts;
}

bool bits_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("parameter count follows the layer shapes") {
    SUBCASE("full-scale shape") {
        SirenSpec spec;
        spec.width = 140;
        spec.depth = 4;
        spec.partitions = 40;
        const PouNet f = init_siren(spec, PolyBasis::tensor_product(), DomainBox{}, 0);
        CHECK(f.param_count() == 67020);
    }
    SUBCASE("minimal shape, counted by hand") {
        SirenSpec spec;
        spec.width = 1;
        spec.depth = 1;
        spec.partitions = 1;
        const PouNet f = init_siren(spec, PolyBasis({PolyTerm{}}), DomainBox{}, 0);
        // first layer 1x3 + bias, output layer 1x1 + bias, one coefficient
        CHECK(f.param_count() == 7);
        CHECK(f.net.param_count() == 6);
    }
    SUBCASE("growing the basis grows only the coefficient block") {
        const PouNet a = small_net(0);
        SirenSpec spec = a.net.spec;
        PouNet b = init_siren(spec, PolyBasis::tensor_product(3, 7), DomainBox{}, 0);
        CHECK(b.param_count() - a.param_count() == spec.partitions * (80 - 40));
    }
}

TEST_CASE("tensor product basis spans the expected monomials") {
    const PolyBasis basis = PolyBasis::tensor_product();
    CHECK(basis.size() == 40);
    Eigen::Matrix3Xd pts(3, 1);
    pts << 0.3, -0.7, 0.5;
    Eigen::MatrixXd vals;
    basis.eval(pts, vals);
    REQUIRE(vals.rows() == 40);
    // constant term present, and the pure cubic in each axis present
    bool has_const = false;
    bool has_x3 = false;
    bool has_t3 = false;
    for (int m = 0; m < basis.size(); ++m) {
        const auto& tm = basis.terms()[static_cast<std::size_t>(m)];
        if (tm.px == 0 && tm.py == 0 && tm.pt == 0) {
            has_const = true;
            CHECK(vals(m, 0) == 1.0);
        }
        if (tm.px == 3 && tm.py == 0 && tm.pt == 0) {
            has_x3 = true;
            CHECK(vals(m, 0) == doctest::Approx(0.3 * 0.3 * 0.3).epsilon(1e-15));
        }
        if (tm.px == 0 && tm.py == 0 && tm.pt == 3) has_t3 = true;
        CHECK(tm.px + tm.py <= 3);
        CHECK(tm.pt <= 3);
    }
    CHECK(has_const);
    CHECK(has_x3);
    CHECK(has_t3);
}

TEST_CASE("partition values are a partition of unity") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        PouNet f = small_net(trial, 3 + trial % 6);
        // random perturbation on top of the init keeps the property structural
        for (auto& w : f.net.W)
            w += Eigen::MatrixXd::NullaryExpr(w.rows(), w.cols(),
                                              [&] { return rng.uniform(-0.5, 0.5); });
        const double x = rng.uniform(-1.45, 1.45);
        const double y = rng.uniform(-1.45, 1.45);
        const double t = rng.uniform(0.0, 5.0);
        const Eigen::VectorXd psi = f.eval_pou(x, y, t);
        REQUIRE(psi.size() == f.net.spec.partitions);
        CHECK(psi.minCoeff() >= 0.0);
        CHECK(std::abs(psi.sum() - 1.0) <= 1e-12);
    }
}

TEST_CASE("field is linear in the coefficients") {
    const PouNet base = small_net(3);
    PouNet a = base;
    PouNet b = base;
    Rng rng(11);
    a.C = Eigen::MatrixXd::NullaryExpr(a.C.rows(), a.C.cols(), [&] { return rng.normal(); });
    b.C = Eigen::MatrixXd::NullaryExpr(b.C.rows(), b.C.cols(), [&] { return rng.normal(); });
    PouNet combo = base;
    const double alpha = -0.37;
    combo.C = a.C + alpha * b.C;
    const auto pts = random_points(64, 5);
    Eigen::VectorXd va, vb, vc;
    a.eval_batch(pts, va);
    b.eval_batch(pts, vb);
    combo.eval_batch(pts, vc);
    for (int i = 0; i < 64; ++i)
        CHECK(vc[i] == doctest::Approx(va[i] + alpha * vb[i]).epsilon(1e-12));
}

TEST_CASE("identical coefficient rows reproduce the shared polynomial exactly") {
    PouNet f = small_net(9, 6);
    Rng rng(13);
    Eigen::VectorXd coeff(f.basis.size());
    for (int m = 0; m < f.basis.size(); ++m) coeff[m] = rng.uniform(-1.0, 1.0);
    for (int p = 0; p < f.C.rows(); ++p) f.C.row(p) = coeff.transpose();

    const auto pts = random_points(128, 17);
    const Eigen::Matrix3Xd ptsn = normalize_batch(f.domain, pts);
    Eigen::MatrixXd bvals;
    f.basis.eval(ptsn, bvals);
    Eigen::VectorXd got;
    f.eval_batch(pts, got);
    for (int i = 0; i < 128; ++i) {
        const double want = coeff.dot(bvals.col(i));
        CHECK(got[i] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("a polynomial target is matched exactly by solving for the coefficients") {
    // the pointwise squared loss is quadratic in C, so the normal equations
    // give the exact embedding; the residual must vanish in the basis span
    PouNet f = small_net(21, 3);
    const int n = 400;
    const auto pts = random_points(n, 23);
    const Eigen::Matrix3Xd ptsn = normalize_batch(f.domain, pts);
    Eigen::MatrixXd bvals;
    f.basis.eval(ptsn, bvals);
    Rng rng(29);
    Eigen::VectorXd coeff(f.basis.size());
    for (int m = 0; m < f.basis.size(); ++m) coeff[m] = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXd target = bvals.transpose() * coeff;

    // design matrix: phi_i = sum_p psi_p(x_i) * (C row p) . B(x_i)
    const int P = f.net.spec.partitions;
    const int M = f.basis.size();
    Eigen::MatrixXd design(n, P * M);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd psi = f.eval_pou(pts(0, i), pts(1, i), pts(2, i));
        for (int p = 0; p < P; ++p)
            design.row(i).segment(p * M, M) = psi[p] * bvals.col(i).transpose();
    }
    const Eigen::VectorXd cvec = design.colPivHouseholderQr().solve(target);
    const double loss = 0.5 * (design * cvec - target).squaredNorm();
    CHECK(loss <= 1e-8);
}

TEST_CASE("initialization is deterministic and respects the stated ranges") {
    const PouNet a = small_net(42);
    const PouNet b = small_net(42);
    CHECK(bits_equal(eta_to_vector(a.net), eta_to_vector(b.net)));
    CHECK(bits_equal(a.C, b.C));
    const PouNet c = small_net(43);
    CHECK(!bits_equal(eta_to_vector(a.net), eta_to_vector(c.net)));

    const int width = a.net.spec.width;
    CHECK(a.net.W[0].cwiseAbs().maxCoeff() <= 1.0 / 3.0);
    CHECK(a.net.W[1].cwiseAbs().maxCoeff() <=
          std::sqrt(6.0 / width) / a.net.spec.omega_hidden + 1e-15);
    CHECK(a.net.W.back().cwiseAbs().maxCoeff() <= std::sqrt(6.0 / width) + 1e-15);
    CHECK(a.C.cwiseAbs().maxCoeff() <= 0.01);
}

TEST_CASE("checkpoint round trip is bit exact") {
    testsupport::TempDir dir("field_checkpoint");
    PouNet f = small_net(77, 5, 16, 3);
    Rng rng(78);
    f.C = Eigen::MatrixXd::NullaryExpr(f.C.rows(), f.C.cols(), [&] { return rng.normal(); });
    const auto path = dir.path() / "field.pounet";
    save_pounet(f, path, "cafebabe");
    const PouNet g = load_pounet(path);
    CHECK(g.net.spec.width == f.net.spec.width);
    CHECK(g.net.spec.depth == f.net.spec.depth);
    CHECK(g.net.spec.partitions == f.net.spec.partitions);
    CHECK(g.net.spec.omega_first == f.net.spec.omega_first);
    CHECK(g.net.spec.omega_hidden == f.net.spec.omega_hidden);
    CHECK(bits_equal(eta_to_vector(g.net), eta_to_vector(f.net)));
    CHECK(bits_equal(g.C, f.C));
    CHECK(g.domain.half_extent == f.domain.half_extent);
    CHECK(g.domain.total_time == f.domain.total_time);

    // saving the loaded copy reproduces the file byte for byte
    const auto path2 = dir.path() / "field2.pounet";
    save_pounet(g, path2, "cafebabe");
    CHECK(testsupport::slurp(path) == testsupport::slurp(path2));
}

TEST_CASE("batch evaluation matches scalar evaluation") {
    const PouNet f = small_net(5);
    const auto pts = random_points(33, 6);
    Eigen::VectorXd batch;
    f.eval_batch(pts, batch);
    for (int i = 0; i < 33; ++i)
        CHECK(batch[i] == doctest::Approx(f.eval(pts(0, i), pts(1, i), pts(2, i))).epsilon(1e-14));
}
