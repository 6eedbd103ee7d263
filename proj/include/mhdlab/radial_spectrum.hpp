// Symmetric pencil discretization of the radial operators
//   L_k = -(1/r) d_r((1/r) d_r .) + k^2/r^2 + F(r),  k >= 1,
// paired in L^2(r dr). P1 finite elements give the quadratic form
//   Q_k(phi) = int (phi'^2 + k^2 phi^2) / r dr + int F phi^2 r dr
// with homogeneous Dirichlet ends (axis regularity / decay). Negative
// directions are counted by LDL^T pivot signs of the tridiagonal K and
// cross-checked against a dense generalized eigensolve.
#pragma once

#include "mhdlab/common.hpp"
#include "mhdlab/profiles.hpp"

#include <Eigen/Eigenvalues>

namespace mhdlab {

struct SymTridiag {
    ArrayXd diag;  // n
    ArrayXd sub;   // n-1
    Eigen::Index size() const { return diag.size(); }

    MatrixXd dense() const {
        MatrixXd m = MatrixXd::Zero(size(), size());
        for (Eigen::Index i = 0; i < size(); ++i) {
            m(i, i) = diag[i];
            if (i + 1 < size()) m(i, i + 1) = m(i + 1, i) = sub[i];
        }
        return m;
    }
};

struct OperatorPencil {
    SymTridiag K;  // stiffness (quadratic form of L_k)
    SymTridiag M;  // mass, int phi^2 r dr (positive definite)
    int k = 0;
    Eigen::Index n_dof = 0;
    ArrayXd r_interior;
};

struct InertiaResult {
    int k = 0;
    int n_neg = 0;
    ArrayXd min_eigs;  // lowest 5 generalized eigenvalues
    Eigen::Index resolution = 0;
    bool ldlt_fallback = false;  // dense path used because LDL^T broke down
};

struct TotalInertia {
    std::vector<InertiaResult> per_k;
    int total = 0;
    int k_star = -1;  // first k of the first pair of consecutive zero counts
};

namespace detail {

// Element contributions assembled with 4-point Gauss-Legendre; F is taken
// as the P1 interpolant of its nodal values.
struct PencilParts {
    SymTridiag grad;    // int phi' psi' / r dr
    SymTridiag inv_r;   // int phi psi / r dr   (k^2 weight)
    SymTridiag pot;     // int F phi psi r dr
    SymTridiag mass_r;  // int phi psi r dr
};

inline PencilParts assemble_parts(const ArrayXd& r, const ArrayXd& F) {
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    const Eigen::Index n = r.size();
    const Eigen::Index nd = n - 2;
    PencilParts P;
    for (SymTridiag* t : {&P.grad, &P.inv_r, &P.pot, &P.mass_r}) {
        t->diag = ArrayXd::Zero(nd);
        t->sub = ArrayXd::Zero(nd - 1);
    }
    auto add = [nd](SymTridiag& t, Eigen::Index a, Eigen::Index b, double v) {
        // a, b are full-grid node indices; interior dof index = node - 1
        Eigen::Index ia = a - 1, ib = b - 1;
        if (ia < 0 || ia >= nd || ib < 0 || ib >= nd) return;
        if (ia == ib)
            t.diag[ia] += v;
        else
            t.sub[std::min(ia, ib)] += v;
    };
    for (Eigen::Index e = 0; e + 1 < n; ++e) {
        const double ra = r[e], rb = r[e + 1], h = rb - ra;
        const double Fa = F[e], Fb = F[e + 1];
        double g00 = 0, g01 = 0, g11 = 0;    // phi'_i phi'_j / r
        double w00 = 0, w01 = 0, w11 = 0;    // phi_i phi_j / r
        double p00 = 0, p01 = 0, p11 = 0;    // F phi_i phi_j r
        double m00 = 0, m01 = 0, m11 = 0;    // phi_i phi_j r
        for (int q = 0; q < 4; ++q) {
            const double s = 0.5 * (gx[q] + 1.0);  // in [0,1]
            const double x = ra + s * h;
            const double w = 0.5 * h * gw[q];
            const double Na = 1.0 - s, Nb = s;
            const double Fq = Fa * Na + Fb * Nb;
            const double inv_r = 1.0 / x;
            g00 += w * inv_r / (h * h);
            g01 -= w * inv_r / (h * h);
            g11 += w * inv_r / (h * h);
            w00 += w * Na * Na * inv_r;
            w01 += w * Na * Nb * inv_r;
            w11 += w * Nb * Nb * inv_r;
            p00 += w * Fq * Na * Na * x;
            p01 += w * Fq * Na * Nb * x;
            p11 += w * Fq * Nb * Nb * x;
            m00 += w * Na * Na * x;
            m01 += w * Na * Nb * x;
            m11 += w * Nb * Nb * x;
        }
        add(P.grad, e, e, g00);
        add(P.grad, e, e + 1, g01);
        add(P.grad, e + 1, e + 1, g11);
        add(P.inv_r, e, e, w00);
        add(P.inv_r, e, e + 1, w01);
        add(P.inv_r, e + 1, e + 1, w11);
        add(P.pot, e, e, p00);
        add(P.pot, e, e + 1, p01);
        add(P.pot, e + 1, e + 1, p11);
        add(P.mass_r, e, e, m00);
        add(P.mass_r, e, e + 1, m01);
        add(P.mass_r, e + 1, e + 1, m11);
    }
    return P;
}

// Number of negative pivots of the LDL^T factorization (Sylvester inertia).
// Returns -1 on pivot breakdown.
inline int ldlt_negative_pivots(const SymTridiag& K) {
    const Eigen::Index n = K.size();
    int neg = 0;
    double scale = K.diag.abs().maxCoeff() + K.sub.abs().maxCoeff();
    double d_prev = K.diag[0];
    if (std::abs(d_prev) < 1e-300 * scale) return -1;
    if (d_prev < 0) ++neg;
    for (Eigen::Index i = 1; i < n; ++i) {
        double d = K.diag[i] - K.sub[i - 1] * K.sub[i - 1] / d_prev;
        if (std::abs(d) < 1e-300 * scale) return -1;
        if (d < 0) ++neg;
        d_prev = d;
    }
    return neg;
}

}  // namespace detail

inline OperatorPencil assemble_pencil(const ArrayXd& potential, int k, const ArrayXd& grid) {
    if (k < 1) throw std::invalid_argument("assemble_pencil: k must be >= 1 (the k = 0 sector is excluded)");
    if (grid.size() < 4) throw std::invalid_argument("assemble_pencil: need at least 4 nodes");
    if (potential.size() != grid.size()) throw std::invalid_argument("assemble_pencil: potential/grid mismatch");
    detail::PencilParts P = detail::assemble_parts(grid, potential);
    OperatorPencil pen;
    pen.k = k;
    pen.n_dof = grid.size() - 2;
    pen.r_interior = grid.segment(1, pen.n_dof);
    pen.K.diag = P.grad.diag + double(k) * double(k) * P.inv_r.diag + P.pot.diag;
    pen.K.sub = P.grad.sub + double(k) * double(k) * P.inv_r.sub + P.pot.sub;
    pen.M = P.mass_r;
    return pen;
}

// Lowest generalized eigenvalues of (K, M) by the dense symmetric solver.
inline ArrayXd lowest_pencil_eigenvalues(const OperatorPencil& pen, int count) {
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(pen.K.dense(), pen.M.dense(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("lowest_pencil_eigenvalues: eigensolve failed");
    const Eigen::Index m = std::min<Eigen::Index>(count, pen.n_dof);
    return es.eigenvalues().head(m).array();
}

inline InertiaResult negative_count(const OperatorPencil& pen) {
    InertiaResult res;
    res.k = pen.k;
    res.resolution = pen.n_dof;

    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(pen.K.dense(), pen.M.dense(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("negative_count: dense eigensolve failed");
    const VectorXd evs = es.eigenvalues();
    int dense_neg = 0;
    for (Eigen::Index i = 0; i < evs.size(); ++i)
        if (evs[i] < 0.0) ++dense_neg;
    res.min_eigs = evs.head(std::min<Eigen::Index>(5, evs.size())).array();

    int ldlt_neg = detail::ldlt_negative_pivots(pen.K);
    if (ldlt_neg < 0) {
        res.ldlt_fallback = true;
        res.n_neg = dense_neg;
        return res;
    }
    if (ldlt_neg != dense_neg)
        throw std::runtime_error("negative_count: LDL^T inertia (" + std::to_string(ldlt_neg) +
                                 ") disagrees with dense eigensolve (" + std::to_string(dense_neg) + ")");
    res.n_neg = ldlt_neg;
    return res;
}

// Sweep k = 1..k_cap. Inertia is nonincreasing in k (K(k+1) - K(k) is PSD),
// so the sweep stops after two consecutive zero counts; a violation of the
// monotonicity is a hard error.
inline TotalInertia total_negative_count(const RadialProfile& profile, double epsilon, int k_cap,
                                         const ArrayXd* grid_override = nullptr) {
    if (k_cap < 2) throw std::invalid_argument("total_negative_count: k_cap must be >= 2");
    const ArrayXd& grid = grid_override ? *grid_override : profile.r;
    ArrayXd F = rayleigh_potential(profile, epsilon);
    if (grid_override) {
        // potential must live on the sweep grid
        if (grid.size() != profile.r.size()) throw std::invalid_argument("total_negative_count: grid mismatch");
    }
    detail::PencilParts P = detail::assemble_parts(grid, F);

    TotalInertia out;
    int consecutive_zero = 0;
    int prev = std::numeric_limits<int>::max();
    for (int k = 1; k <= k_cap; ++k) {
        OperatorPencil pen;
        pen.k = k;
        pen.n_dof = grid.size() - 2;
        pen.r_interior = grid.segment(1, pen.n_dof);
        pen.K.diag = P.grad.diag + double(k) * double(k) * P.inv_r.diag + P.pot.diag;
        pen.K.sub = P.grad.sub + double(k) * double(k) * P.inv_r.sub + P.pot.sub;
        pen.M = P.mass_r;
        InertiaResult res = negative_count(pen);
        if (res.n_neg > prev)
            throw std::runtime_error("total_negative_count: inertia increased from k=" + std::to_string(k - 1) +
                                     " to k=" + std::to_string(k) + " (assembly bug)");
        prev = res.n_neg;
        out.total += res.n_neg;
        out.per_k.push_back(std::move(res));
        consecutive_zero = (out.per_k.back().n_neg == 0) ? consecutive_zero + 1 : 0;
        if (consecutive_zero == 2) {
            out.k_star = k - 1;
            break;
        }
    }
    return out;
}

inline std::string inertia_csv(const TotalInertia& t) {
    std::string s = "k,n_neg,lambda_min,n_dof\n";
    for (const auto& r : t.per_k)
        s += std::to_string(r.k) + "," + std::to_string(r.n_neg) + "," + fmt_g17(r.min_eigs[0]) + "," +
             std::to_string(r.resolution) + "\n";
    return s;
}

}  // namespace mhdlab
