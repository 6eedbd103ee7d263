// Radial angular-velocity and magnetic profiles of the rotating steady state
//   v0 = r*omega(r) e_theta,  H0 = eps*b(r) e_z,
// their derivative tables, decay diagnostics, the Rayleigh-type potential
// F(r), and the steady background (including the magnetic potential psi0).
#pragma once

#include "mhdlab/common.hpp"

#include <optional>

namespace mhdlab {

enum class ProfileKind { RationalDecay, GaussianDecay, UserTable };

// Analytic families:
//   rational-decay: omega = c0*(1+r^2)^(-p),   params [c0, p, b0, b1, sb]
//   gaussian-decay: omega = c0*exp(-s*r^2),    params [c0, s,  b0, b1, sb]
// with b(r) = b0 + b1*exp(-sb*r^2) in both; trailing params default to
// [.., 1, 0, 1]. User tables supply (r, omega, b) samples instead.
struct ProfileSpec {
    ProfileKind kind = ProfileKind::RationalDecay;
    std::vector<double> parameters{1.0, 0.75, 1.0, 0.0, 1.0};
    double epsilon = 0.05;  // magnetic amplitude, > 0
    double beta = 1.0;      // background amplification, >= 1
    // user-table samples (kind == UserTable only)
    ArrayXd table_r, table_omega, table_b;

    double param(std::size_t i, double dflt) const { return i < parameters.size() ? parameters[i] : dflt; }

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("ProfileSpec: epsilon must be > 0");
        if (!(beta >= 1.0)) throw std::invalid_argument("ProfileSpec: beta must be >= 1");
        if (kind == ProfileKind::UserTable) {
            if (table_r.size() < 5 || table_r.size() != table_omega.size() || table_r.size() != table_b.size())
                throw std::invalid_argument("ProfileSpec: user table needs >= 5 matching samples");
        }
    }

    double omega(double r) const {
        switch (kind) {
            case ProfileKind::RationalDecay: return param(0, 1.0) * std::pow(1.0 + r * r, -param(1, 0.75));
            case ProfileKind::GaussianDecay: return param(0, 1.0) * std::exp(-param(1, 1.0) * r * r);
            default: throw std::logic_error("omega(): user tables have no closed form");
        }
    }
    // d/dr of omega^2
    double d_omega2(double r) const {
        switch (kind) {
            case ProfileKind::RationalDecay: {
                const double c0 = param(0, 1.0), p = param(1, 0.75);
                return -4.0 * p * c0 * c0 * r * std::pow(1.0 + r * r, -2.0 * p - 1.0);
            }
            case ProfileKind::GaussianDecay: {
                const double c0 = param(0, 1.0), s = param(1, 1.0);
                return -4.0 * s * c0 * c0 * r * std::exp(-2.0 * s * r * r);
            }
            default: throw std::logic_error("d_omega2(): user tables have no closed form");
        }
    }
    double d_omega(double r) const {
        switch (kind) {
            case ProfileKind::RationalDecay: {
                const double c0 = param(0, 1.0), p = param(1, 0.75);
                return -2.0 * p * c0 * r * std::pow(1.0 + r * r, -p - 1.0);
            }
            case ProfileKind::GaussianDecay: {
                const double c0 = param(0, 1.0), s = param(1, 1.0);
                return -2.0 * s * c0 * r * std::exp(-s * r * r);
            }
            default: throw std::logic_error("d_omega(): user tables have no closed form");
        }
    }
    double d2_omega(double r) const {
        switch (kind) {
            case ProfileKind::RationalDecay: {
                const double c0 = param(0, 1.0), p = param(1, 0.75);
                const double u = 1.0 + r * r;
                return -2.0 * p * c0 * std::pow(u, -p - 2.0) * (u - 2.0 * (p + 1.0) * r * r);
            }
            case ProfileKind::GaussianDecay: {
                const double c0 = param(0, 1.0), s = param(1, 1.0);
                return (-2.0 * s + 4.0 * s * s * r * r) * c0 * std::exp(-s * r * r);
            }
            default: throw std::logic_error("d2_omega(): user tables have no closed form");
        }
    }
    double b(double r) const {
        if (kind == ProfileKind::UserTable) throw std::logic_error("b(): user tables have no closed form");
        const double b0 = param(2, 1.0), b1 = param(3, 0.0), sb = param(4, 1.0);
        return b0 + b1 * std::exp(-sb * r * r);
    }
    double d_b(double r) const {
        const double b1 = param(3, 0.0), sb = param(4, 1.0);
        return -2.0 * sb * b1 * r * std::exp(-sb * r * r);
    }
    double d2_b(double r) const {
        const double b1 = param(3, 0.0), sb = param(4, 1.0);
        return b1 * (-2.0 * sb + 4.0 * sb * sb * r * r) * std::exp(-sb * r * r);
    }

    bool analytic() const { return kind != ProfileKind::UserTable; }
};

// Tabulated profile with derivative tables on a strictly increasing grid.
struct RadialProfile {
    ArrayXd r;
    ArrayXd omega, b;
    ArrayXd d_omega2, d_b, d2_b;

    Eigen::Index size() const { return r.size(); }
};

struct BackgroundField {
    ArrayXd r;
    ArrayXd v0_theta;  // r*omega(r)
    ArrayXd H0_z;      // eps*b(r)
    ArrayXd psi0;      // -eps * int_0^r s b(s) ds
    double beta = 1.0;
};

struct DecayCondition {
    std::string name;
    double fitted_slope = 0.0;
    double required_slope = 0.0;  // pass when fitted_slope <= required_slope (or trivially zero)
    double residual = 0.0;        // rms residual of the log-log fit
    bool trivially_zero = false;
    bool passes = false;
};

struct DecayReport {
    double alpha_fit = 0.0;  // from the outer d(omega^2) slope: (-slope - 3)/2
    double beta_fit = 0.0;   // from the inner d(omega^2) slope: slope + 3
    std::vector<DecayCondition> conditions;
    bool all_pass = false;
};

struct MriCriterion {
    bool stable_rayleigh = false;
    bool marginal = false;
    std::optional<double> r0;  // a node with d(omega^2) < 0, when one exists
};

namespace detail {

// 5-point finite-difference derivative tables on arbitrary nodes (order 4
// for the first derivative, >= 3 for the second).
inline ArrayXd table_derivative(const ArrayXd& x, const ArrayXd& f, int order) {
    const Eigen::Index n = x.size();
    ArrayXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index lo = std::clamp<Eigen::Index>(i - 2, 0, n - 5);
        VectorXd xs = x.segment(lo, 5).matrix();
        VectorXd w = fd_weights(x[i], xs, order);
        out[i] = (w.array() * f.segment(lo, 5)).sum();
    }
    return out;
}

}  // namespace detail

// Tabulate a profile spec on a grid. Analytic families use closed-form
// derivatives; user tables are resampled only if the grid matches their
// nodes (tables enter on their own grid) and differentiated by 5-point
// finite differences.
inline RadialProfile eval_profile(const ProfileSpec& spec, const ArrayXd& grid) {
    spec.validate();
    const Eigen::Index n = grid.size();
    if (n < 5) throw std::invalid_argument("eval_profile: need at least 5 nodes");
    if (grid[0] <= 0.0) throw std::invalid_argument("eval_profile: first node must be > 0");
    for (Eigen::Index i = 1; i < n; ++i)
        if (grid[i] <= grid[i - 1]) throw std::invalid_argument("eval_profile: grid must be strictly increasing");

    RadialProfile p;
    p.r = grid;
    p.omega.resize(n);
    p.b.resize(n);
    p.d_omega2.resize(n);
    p.d_b.resize(n);
    p.d2_b.resize(n);

    if (spec.analytic()) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = grid[i];
            p.omega[i] = spec.omega(r);
            p.b[i] = spec.b(r);
            p.d_omega2[i] = spec.d_omega2(r);
            p.d_b[i] = spec.d_b(r);
            p.d2_b[i] = spec.d2_b(r);
        }
    } else {
        if (grid.size() != spec.table_r.size() || (grid - spec.table_r).abs().maxCoeff() > 1e-12)
            throw std::invalid_argument("eval_profile: user-table profiles must be evaluated on their own grid");
        p.omega = spec.table_omega;
        p.b = spec.table_b;
        p.d_omega2 = detail::table_derivative(grid, p.omega * p.omega, 1);
        p.d_b = detail::table_derivative(grid, p.b, 1);
        p.d2_b = detail::table_derivative(grid, p.b, 2);
    }

    if ((p.b <= 0.0).any()) throw std::invalid_argument("eval_profile: b must have a positive lower bound");
    return p;
}

namespace detail {

inline DecayCondition fit_decade_slope(const std::string& name, const ArrayXd& r, const ArrayXd& f, double lo,
                                       double hi, double required) {
    DecayCondition c;
    c.name = name;
    c.required_slope = required;
    std::vector<double> xs, ys;
    double scale = f.abs().maxCoeff();
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (r[i] >= lo && r[i] <= hi && std::abs(f[i]) > 1e-300) {
            xs.push_back(std::log(r[i]));
            ys.push_back(std::log(std::abs(f[i])));
        }
    }
    if (scale < 1e-14) {  // identically zero satisfies any decay bound
        c.trivially_zero = true;
        c.passes = true;
        return c;
    }
    if (xs.size() < 8) throw std::invalid_argument("check_decay: insufficient decade for " + name);
    ArrayXd x = Eigen::Map<ArrayXd>(xs.data(), Eigen::Index(xs.size()));
    ArrayXd y = Eigen::Map<ArrayXd>(ys.data(), Eigen::Index(ys.size()));
    LineFit fit = fit_line(x, y);
    c.fitted_slope = fit.slope;
    ArrayXd res = y - (fit.slope * x + fit.intercept);
    c.residual = std::sqrt((res * res).mean());
    // slope tolerance absorbs the pre-asymptotic part of the decade
    c.passes = fit.slope <= required + 0.2;
    return c;
}

}  // namespace detail

// Fit decay exponents of the derivative tables on the outer and inner
// decades of the grid and check them against the hypotheses needed for
// instability of the truncated operator family:
//   outer: d(omega^2) = O(r^(-3-2a)), d b = O(r^(-1-2a)), some a > 0,
//          and the finite-energy requirement omega = O(r^(-1-a));
//   inner: d(omega^2) = O(r^(beta-3)), d b = O(r^(beta-1)), some beta > 0.
inline DecayReport check_decay(const RadialProfile& p) {
    const double rmin = p.r[0], rmax = p.r[p.size() - 1];
    if (rmax / rmin < 100.0)
        throw std::invalid_argument("check_decay: grid must span two decades on each end (rmax/rmin >= 100)");
    const double outer_lo = rmax / 10.0, inner_hi = rmin * 10.0;

    DecayReport rep;
    auto& cs = rep.conditions;
    cs.push_back(detail::fit_decade_slope("outer d_omega2 = O(r^-3-2a)", p.r, p.d_omega2, outer_lo, rmax, -3.0));
    cs.push_back(detail::fit_decade_slope("outer d_b = O(r^-1-2a)", p.r, p.d_b, outer_lo, rmax, -1.0));
    cs.push_back(detail::fit_decade_slope("outer omega = O(r^-1-a)", p.r, p.omega, outer_lo, rmax, -1.0));
    cs.push_back(detail::fit_decade_slope("inner d_omega2 = O(r^beta-3)", p.r, p.d_omega2, rmin, inner_hi, -3.0));
    cs.push_back(detail::fit_decade_slope("inner d_b = O(r^beta-1)", p.r, p.d_b, rmin, inner_hi, -1.0));

    // strict inequalities must hold with a positive margin for the exponents
    auto strict = [&](DecayCondition& c, double margin) {
        if (!c.trivially_zero) c.passes = c.fitted_slope <= c.required_slope - margin;
    };
    strict(cs[0], 0.05);
    strict(cs[1], 0.05);
    strict(cs[2], 0.05);
    // inner conditions require slope > required (beta > 0), sign flips
    for (int i : {3, 4})
        if (!cs[i].trivially_zero) cs[i].passes = cs[i].fitted_slope >= cs[i].required_slope + 0.05;

    rep.alpha_fit = cs[0].trivially_zero ? 0.0 : (-cs[0].fitted_slope - 3.0) / 2.0;
    rep.beta_fit = cs[3].trivially_zero ? 0.0 : cs[3].fitted_slope + 3.0;
    rep.all_pass = true;
    for (const auto& c : cs) rep.all_pass = rep.all_pass && c.passes;
    return rep;
}

// Rayleigh-type sign check: stable when d(omega^2) > 0 at every interior
// node, marginal when it vanishes identically; otherwise report the first
// interior node where it is negative.
inline MriCriterion mri_criterion(const RadialProfile& p) {
    MriCriterion out;
    const Eigen::Index n = p.size();
    const double scale = p.d_omega2.abs().maxCoeff();
    const double tol = 1e-13 * std::max(scale, 1e-30);
    if (scale <= 1e-14 * std::max(1.0, (p.omega * p.omega).maxCoeff())) {
        out.marginal = true;
        return out;
    }
    bool all_pos = true;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        if (p.d_omega2[i] < -tol) {
            out.r0 = p.r[i];
            return out;
        }
        if (p.d_omega2[i] <= tol) all_pos = false;
    }
    if (all_pos)
        out.stable_rayleigh = true;
    else
        out.marginal = true;
    return out;
}

// F(r) = d_r(omega^2)/(eps^2 b^2 r) + d_r^2 b/(r^2 b) - d_r b/(r^3 b)
inline ArrayXd rayleigh_potential(const RadialProfile& p, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("rayleigh_potential: epsilon must be > 0");
    if ((p.r <= 0.0).any()) throw std::invalid_argument("rayleigh_potential: grid must be positive");
    const double e2 = epsilon * epsilon;
    return p.d_omega2 / (e2 * p.b * p.b * p.r) + p.d2_b / (p.r * p.r * p.b) - p.d_b / (p.r * p.r * p.r * p.b);
}

// psi0(r) = -eps * int_0^r s b(s) ds by composite Simpson between nodes
// (midpoint values of b from the closed form or cubic interpolation); the
// innermost cell uses the small-r limit b(0+) r^2 / 2.
inline BackgroundField build_background(const ProfileSpec& spec, const RadialProfile& p) {
    spec.validate();
    const Eigen::Index n = p.size();
    BackgroundField bg;
    bg.r = p.r;
    bg.v0_theta = p.r * p.omega;
    bg.H0_z = spec.epsilon * p.b;
    bg.beta = spec.beta;
    bg.psi0.resize(n);

    auto b_at = [&](double r) -> double {
        if (spec.analytic()) return spec.b(r);
        // cubic Lagrange interpolation from the table
        const Eigen::Index m = p.size();
        Eigen::Index i = std::distance(p.r.data(), std::lower_bound(p.r.data(), p.r.data() + m, r));
        Eigen::Index lo = std::clamp<Eigen::Index>(i - 2, 0, m - 4);
        double acc = 0.0;
        for (Eigen::Index a = lo; a < lo + 4; ++a) {
            double L = 1.0;
            for (Eigen::Index c = lo; c < lo + 4; ++c)
                if (c != a) L *= (r - p.r[c]) / (p.r[a] - p.r[c]);
            acc += L * p.b[a];
        }
        return acc;
    };

    const double b0 = spec.analytic() ? spec.b(0.0) : b_at(p.r[0]);
    double acc = b0 * p.r[0] * p.r[0] / 2.0;  // int_0^{r_0} s b ds, b ~ b(0+)
    bg.psi0[0] = -spec.epsilon * acc;
    for (Eigen::Index i = 1; i < n; ++i) {
        const double ra = p.r[i - 1], rb = p.r[i], rm = 0.5 * (ra + rb);
        const double fa = ra * p.b[i - 1], fm = rm * b_at(rm), fb = rb * p.b[i];
        acc += (rb - ra) / 6.0 * (fa + 4.0 * fm + fb);
        bg.psi0[i] = -spec.epsilon * acc;
    }
    return bg;
}

// CSV export with header r,omega,b,d_omega2,d_b,d2_b
inline std::string profile_csv(const RadialProfile& p) {
    std::string s = "r,omega,b,d_omega2,d_b,d2_b\n";
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        s += fmt_g17(p.r[i]) + "," + fmt_g17(p.omega[i]) + "," + fmt_g17(p.b[i]) + "," + fmt_g17(p.d_omega2[i]) +
             "," + fmt_g17(p.d_b[i]) + "," + fmt_g17(p.d2_b[i]) + "\n";
    }
    return s;
}

}  // namespace mhdlab
