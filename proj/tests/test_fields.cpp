#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mhdlab/fields.hpp"
#include "mhdlab/forms.hpp"
#include "mhdlab/projection.hpp"

#include <random>

using namespace mhdlab;

namespace {

ArrayXXd eval_on(const GridRZ& g, const std::function<double(double, double)>& f) {
    ArrayXXd out(g.nr, g.nz);
    for (Eigen::Index j = 0; j < g.nz; ++j)
        for (Eigen::Index i = 0; i < g.nr; ++i) out(i, j) = f(g.r[i], g.z[j]);
    return out;
}

// compactly supported C^5 bump on |s| < 1
double bump(double s) { return std::abs(s) < 1.0 ? std::pow(1.0 - s * s, 6) : 0.0; }

ArrayXXd smooth_random(const GridRZ& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    ArrayXXd f = ArrayXXd::Zero(g.nr, g.nz);
    for (int n = 0; n < 6; ++n) {
        const double rc = 0.15 * g.Rmax + 0.5 * g.Rmax * (0.5 + 0.5 * U(rng));
        const double zc = g.periodic_z() ? EIGEN_PI * (1.0 + U(rng)) : 0.6 * g.Zmax * U(rng);
        const double w = 0.08 * g.Rmax * (1.5 + U(rng));
        const double amp = U(rng);
        for (Eigen::Index j = 0; j < g.nz; ++j)
            for (Eigen::Index i = 0; i < g.nr; ++i) {
                double dz = g.z[j] - zc;
                if (g.periodic_z()) dz = std::remainder(dz, 2.0 * EIGEN_PI);
                f(i, j) += amp * std::exp(-(std::pow(g.r[i] - rc, 2) + dz * dz) / (2.0 * w * w));
            }
    }
    return f;
}

}  // namespace

TEST_CASE("recover_poloidal reproduces the uniform vertical field from psi0") {
    for (bool periodic : {true, false}) {
        GridRZ g = periodic ? GridRZ::periodic(96, 32, 6.0) : GridRZ::truncated(96, 33, 6.0, 6.0);
        const double eps = 0.05;
        ArrayXXd phi = eval_on(g, [&](double r, double) { return -eps * r * r / 2.0; });
        auto [br, bz] = recover_poloidal(phi, g);
        CHECK(br.abs().maxCoeff() < 1e-15);
        // exact at every row except the outer reflection row (psi0 does not decay)
        CHECK((bz.topRows(g.nr - 1) - eps).abs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("recover_poloidal of phi = r^2 sin z and exact discrete divergence") {
    GridRZ g = GridRZ::periodic(64, 48, 3.0);
    ArrayXXd phi = eval_on(g, [](double r, double z) { return r * r * std::sin(z); });
    auto [br, bz] = recover_poloidal(phi, g);
    ArrayXXd br_exact = eval_on(g, [](double r, double z) { return r * std::cos(z); });
    ArrayXXd bz_exact = eval_on(g, [](double, double z) { return -2.0 * std::sin(z); });
    CHECK((br - br_exact).abs().maxCoeff() < 1e-12);
    CHECK((bz.topRows(g.nr - 1) - bz_exact.topRows(g.nr - 1)).abs().maxCoeff() < 1e-12);
    ArrayXXd div = divergence(br, bz, g);
    CHECK(div.abs().maxCoeff() < 1e-13);  // includes the boundary rows

    GridRZ gt = GridRZ::truncated(64, 49, 3.0, 3.0);
    ArrayXXd phit = smooth_random(gt, 7);
    auto [brt, bzt] = recover_poloidal(phit, gt);
    CHECK(divergence(brt, bzt, gt).abs().maxCoeff() < 1e-13);
}

TEST_CASE("zero flux function gives zero field") {
    GridRZ g = GridRZ::truncated(32, 17, 4.0, 4.0);
    auto [br, bz] = recover_poloidal(ArrayXXd::Zero(g.nr, g.nz), g);
    CHECK(br.abs().maxCoeff() == 0.0);
    CHECK(bz.abs().maxCoeff() == 0.0);
}

TEST_CASE("leray projection: idempotence, gradient annihilation, div-free fixed point") {
    for (bool periodic : {true, false}) {
        CAPTURE(periodic);
        GridRZ g = periodic ? GridRZ::periodic(72, 32, 6.0) : GridRZ::truncated(72, 41, 6.0, 6.0);
        ProjectorRZ proj(g);

        // divergence-free input (from a decaying stream function) is fixed
        ArrayXXd chi = smooth_random(g, 3);
        auto [ur0, uz0] = recover_poloidal(chi, g);
        ArrayXXd ur = ur0, uz = uz0;
        proj.project(ur, uz);
        const double scale = std::sqrt(integrate_rz(g, (ur0 * ur0 + uz0 * uz0).eval()));
        CHECK(std::sqrt(integrate_rz(g, ((ur - ur0) * (ur - ur0) + (uz - uz0) * (uz - uz0)).eval())) <
              1e-12 * scale);

        // discrete gradients are annihilated
        ArrayXXd p = smooth_random(g, 11);
        ArrayXXd gr = (proj.radial_grad() * p.matrix()).array();
        ArrayXXd gz = ddz(p, g);
        const double gscale = std::sqrt(integrate_rz(g, (gr * gr + gz * gz).eval()));
        proj.project(gr, gz);
        CHECK(std::sqrt(integrate_rz(g, (gr * gr + gz * gz).eval())) < 1e-10 * gscale);

        // idempotence on random smooth input
        ArrayXXd vr = smooth_random(g, 21), vz = smooth_random(g, 22);
        proj.project(vr, vz);
        ArrayXXd vr2 = vr, vz2 = vz;
        proj.project(vr2, vz2);
        const double vscale = std::sqrt(integrate_rz(g, (vr * vr + vz * vz).eval()));
        CHECK(std::sqrt(integrate_rz(g, ((vr2 - vr) * (vr2 - vr) + (vz2 - vz) * (vz2 - vz)).eval())) <
              1e-11 * vscale);

        // projected field is discretely divergence-free
        ArrayXXd d = divergence(vr, vz, g);
        CHECK(std::sqrt(integrate_rz(g, (d * d).eval())) < 1e-12 * vscale);
    }
}

TEST_CASE("trilinear form vanishes on constant-e_z second argument") {
    GridRZ g = GridRZ::truncated(48, 33, 5.0, 5.0);
    Vec3Field u{smooth_random(g, 1), smooth_random(g, 2), smooth_random(g, 3)};
    Vec3Field v{ArrayXXd::Zero(g.nr, g.nz), ArrayXXd::Zero(g.nr, g.nz), ArrayXXd::Constant(g.nr, g.nz, 2.5)};
    Vec3Field w{smooth_random(g, 4), smooth_random(g, 5), smooth_random(g, 6)};
    CHECK(trilinear_b(u, v, w, g) == 0.0);
}

TEST_CASE("trilinear antisymmetry for div-free u decays at 2nd order") {
    auto defect = [](Eigen::Index n) {
        GridRZ g = GridRZ::truncated(n, n + 1, 6.0, 6.0);
        ArrayXXd chi = eval_on(g, [&](double r, double z) { return r * r * bump(r / 4.0) * bump(z / 4.0); });
        auto [ur, uz] = recover_poloidal(chi, g);
        Vec3Field u{ur, ArrayXXd::Zero(g.nr, g.nz), uz};
        Vec3Field v{
            eval_on(g, [](double r, double z) { return r * bump(r / 4.5) * bump(z / 4.5) * std::cos(z); }),
            eval_on(g, [](double r, double z) { return r * bump(r / 4.5) * bump(z / 4.5); }),
            eval_on(g, [](double r, double z) { return bump(r / 4.5) * bump(z / 4.5) * std::sin(z); })};
        const double bvv = trilinear_b(u, v, v, g);
        const double nv = std::sqrt(integrate_rz(g, (v.r * v.r + v.th * v.th + v.z * v.z).eval()));
        const double nu = std::sqrt(integrate_rz(g, (u.r * u.r + u.z * u.z).eval()));
        return std::abs(bvv) / (nu * nv * nv);
    };
    const double d1 = defect(48), d2 = defect(96);
    CHECK(d2 < d1 / 2.5);  // ~ h^2
}

TEST_CASE("trilinear form matches a refined-grid quadrature oracle") {
    // integrand exact at nodes (quadratic in r, single harmonic in z, compact w)
    auto value = [](Eigen::Index nr, Eigen::Index nz) {
        GridRZ g = GridRZ::periodic(nr, nz, 6.0);
        Vec3Field u{eval_on(g, [](double r, double z) { return r * std::cos(z); }),
                    eval_on(g, [](double r, double) { return r; }),
                    eval_on(g, [](double, double z) { return std::sin(z); })};
        Vec3Field v{eval_on(g, [](double r, double z) { return r * std::sin(z); }),
                    eval_on(g, [](double r, double) { return 0.5 * r; }),
                    eval_on(g, [](double, double z) { return std::cos(z); })};
        auto wf = [](double r, double z) { return bump((r - 2.5) / 1.8) * (1.0 + 0.3 * std::cos(z)); };
        Vec3Field w{eval_on(g, [&](double r, double z) { return r * wf(r, z); }),
                    eval_on(g, [&](double r, double z) { return r * wf(r, z) * std::sin(z); }),
                    eval_on(g, [&](double r, double z) { return wf(r, z); })};
        return trilinear_b(u, v, w, g);
    };
    const double coarse = value(64, 24), fine = value(256, 96);
    CHECK(coarse == doctest::Approx(fine).epsilon(1e-6));
}

TEST_CASE("bilinear_B on the steady background gives the centripetal term only") {
    GridRZ g = GridRZ::truncated(64, 33, 6.0, 6.0);
    AxiField bg = AxiField::zero(g, Frame::Similarity);
    const double eps = 0.05;
    auto omega = [](double r) { return std::pow(1.0 + r * r, -0.75); };
    bg.u_th = eval_on(g, [&](double r, double) { return r * omega(r); });
    bg.phi = eval_on(g, [&](double r, double) { return -eps * r * r / 2.0; });  // H0 = eps e_z

    auto out = bilinear_B(bg, bg);
    ArrayXXd expect_r = eval_on(g, [&](double r, double) { return -r * omega(r) * omega(r); });
    CHECK((out.vel.r - expect_r).abs().maxCoeff() < 1e-12);
    CHECK(out.vel.th.abs().maxCoeff() < 1e-12);
    CHECK(out.vel.z.abs().maxCoeff() < 1e-12);
    CHECK(out.mag.r.abs().maxCoeff() < 1e-12);
    CHECK(out.mag.th.abs().maxCoeff() < 1e-12);
    CHECK(out.mag.z.abs().maxCoeff() < 1e-12);
}

TEST_CASE("bilinear_B with constant second state vanishes") {
    GridRZ g = GridRZ::truncated(32, 17, 4.0, 4.0);
    AxiField p1 = AxiField::zero(g, Frame::Similarity);
    p1.u_r = smooth_random(g, 31);
    p1.u_th = smooth_random(g, 32);
    p1.u_z = smooth_random(g, 33);
    p1.phi = smooth_random(g, 34);
    p1.B_th = smooth_random(g, 35);
    AxiField p2 = AxiField::zero(g, Frame::Similarity);
    p2.u_z = ArrayXXd::Constant(g.nr, g.nz, 1.7);
    auto out = bilinear_B(p1, p2);
    for (const ArrayXXd* a : {&out.vel.r, &out.vel.th, &out.vel.z, &out.mag.r, &out.mag.th, &out.mag.z})
        CHECK(a->abs().maxCoeff() == 0.0);
}

TEST_CASE("duality: pairing bilinear_B against a third state reproduces the four-term form") {
    GridRZ g = GridRZ::truncated(48, 33, 5.0, 5.0);
    auto mk = [&](unsigned s) {
        AxiField f = AxiField::zero(g, Frame::Similarity);
        f.u_r = smooth_random(g, s);
        f.u_th = smooth_random(g, s + 1);
        f.u_z = smooth_random(g, s + 2);
        f.phi = smooth_random(g, s + 3);
        f.B_th = smooth_random(g, s + 4);
        return f;
    };
    AxiField p1 = mk(100), p2 = mk(200), p3 = mk(300);
    const double lhs = pair_dot(bilinear_B(p1, p2), p3);
    const double rhs = B0_form(p1, p2, p3);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
}

TEST_CASE("sobolev seminorms: zero state, scaling, Gaussian L2 oracle") {
    GridRZ g = GridRZ::truncated(128, 129, 10.0, 10.0);
    PairState zero(AxiField::zero(g, Frame::Similarity));
    CHECK(sobolev_seminorms(zero, 3).maxCoeff() == 0.0);

    AxiField f = AxiField::zero(g, Frame::Similarity);
    f.u_th = eval_on(g, [](double r, double z) { return r * std::exp(-(r * r + z * z)); });
    PairState s(f);
    ArrayXd table = sobolev_seminorms(s, 2);
    // |u_th|_L2^2 = 2 pi * int r^3 e^(-2r^2) dr * int e^(-2z^2) dz = (pi/4) sqrt(pi/2)
    const double exact = std::sqrt((EIGEN_PI / 4.0) * std::sqrt(EIGEN_PI / 2.0));
    CHECK(table[0] == doctest::Approx(exact).epsilon(1e-8));

    AxiField f3 = f;
    f3 *= -3.0;
    PairState s3(f3);
    ArrayXd t3 = sobolev_seminorms(s3, 2);
    for (int m = 0; m <= 2; ++m) CHECK(t3[m] == doctest::Approx(3.0 * table[m]).epsilon(1e-13));

    // cache recompute invariant
    PairState fresh(f);
    ArrayXd once = sobolev_seminorms(fresh, 2);
    fresh.invalidate();
    ArrayXd twice = sobolev_seminorms(fresh, 2);
    CHECK((once - twice).abs().maxCoeff() < 1e-13 * once.maxCoeff());
}

TEST_CASE("axis safety: parity-correct fields keep operators bounded under refinement") {
    auto norms = [](Eigen::Index n) {
        GridRZ g = GridRZ::truncated(n, 33, 4.0, 4.0);
        ArrayXXd ur = eval_on(g, [](double r, double z) { return r * std::exp(-r * r - z * z); });
        ArrayXXd uz = eval_on(g, [](double r, double z) { return std::exp(-r * r - z * z); });
        return laplacian_odd(ur, g).abs().maxCoeff() + laplacian_even(uz, g).abs().maxCoeff() +
               divergence(ur, uz, g).abs().maxCoeff();
    };
    const double coarse = norms(64), fine = norms(256);
    CHECK(fine < 4.0 * std::max(1.0, coarse));  // bounded, no 1/r blowup
}
