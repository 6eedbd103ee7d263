// Axisymmetric fields on the (r, z) grid and their discrete calculus.
//
// Radial derivatives are 2nd-order centered differences on the half-offset
// grid; ghost values come from parity reflection across the axis (fields
// with e_r/e_theta character are odd, scalars and z-components even) and
// from Dirichlet (odd) or Neumann (even) reflection across r = Rmax.
// z-derivatives are pseudo-spectral (exact ik, zeroed Nyquist) on periodic
// grids and centered differences with odd reflection on truncated grids.
//
// The poloidal magnetic field is carried by the flux function phi with
//   B_r = d_z phi / r,  B_z = -d_r phi / r,
// and the discrete divergence below vanishes identically on such pairs
// because the same difference operators commute.
#pragma once

#include "mhdlab/common.hpp"
#include "mhdlab/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <memory>
#include <optional>

namespace mhdlab {

using ArrayXXcd = Eigen::Array<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXcd = Eigen::VectorXcd;

enum class Parity : int { Even = +1, Odd = -1 };

namespace detail {

inline double sgn(Parity p) { return p == Parity::Even ? 1.0 : -1.0; }

// FFT of every z-line (rows strided by nr in the col-major array).
struct ZSpectrum {
    ArrayXXcd modes;  // nr x nz, full complex spectrum
};

inline ZSpectrum z_fft(const ArrayXXd& f) {
    Eigen::FFT<double> fft;
    const Eigen::Index nr = f.rows(), nz = f.cols();
    ZSpectrum s;
    s.modes.resize(nr, nz);
    VectorXcd line(nz), out(nz);
    for (Eigen::Index i = 0; i < nr; ++i) {
        for (Eigen::Index j = 0; j < nz; ++j) line[j] = f(i, j);
        fft.fwd(out, line);
        s.modes.row(i) = out.transpose().array();
    }
    return s;
}

inline ArrayXXd z_ifft(const ZSpectrum& s) {
    Eigen::FFT<double> fft;
    const Eigen::Index nr = s.modes.rows(), nz = s.modes.cols();
    ArrayXXd f(nr, nz);
    VectorXcd line(nz), out(nz);
    for (Eigen::Index i = 0; i < nr; ++i) {
        line = s.modes.row(i).matrix().transpose();
        fft.inv(out, line);
        for (Eigen::Index j = 0; j < nz; ++j) f(i, j) = out[j].real();
    }
    return f;
}

// signed integer wavenumber of mode m (period 2*pi); Nyquist -> 0
inline double z_wavenumber(Eigen::Index m, Eigen::Index nz) {
    if (2 * m == nz) return 0.0;
    return (m <= nz / 2) ? double(m) : double(m) - double(nz);
}

}  // namespace detail

// d/dr, centered, with axis parity and outer reflection (odd = Dirichlet).
inline ArrayXXd ddr(const ArrayXXd& f, const GridRZ& g, Parity axis, Parity outer = Parity::Odd) {
    const Eigen::Index nr = g.nr, nz = f.cols();
    ArrayXXd out(nr, nz);
    const double c = 1.0 / (2.0 * g.hr);
    out.topRows(1) = c * (f.row(1) - detail::sgn(axis) * f.row(0));
    if (nr > 2) out.middleRows(1, nr - 2) = c * (f.bottomRows(nr - 2) - f.topRows(nr - 2));
    out.bottomRows(1) = c * (detail::sgn(outer) * f.row(nr - 1) - f.row(nr - 2));
    return out;
}

inline ArrayXXd d2dr2(const ArrayXXd& f, const GridRZ& g, Parity axis, Parity outer = Parity::Odd) {
    const Eigen::Index nr = g.nr, nz = f.cols();
    ArrayXXd out(nr, nz);
    const double c = 1.0 / (g.hr * g.hr);
    out.topRows(1) = c * (f.row(1) - 2.0 * f.row(0) + detail::sgn(axis) * f.row(0));
    if (nr > 2)
        out.middleRows(1, nr - 2) =
            c * (f.bottomRows(nr - 2) - 2.0 * f.middleRows(1, nr - 2) + f.topRows(nr - 2));
    out.bottomRows(1) = c * (detail::sgn(outer) * f.row(nr - 1) - 2.0 * f.row(nr - 1) + f.row(nr - 2));
    return out;
}

// d/dz: spectral on periodic grids, centered with odd reflection on
// truncated ones (fields vanish at the z boundary nodes).
inline ArrayXXd ddz(const ArrayXXd& f, const GridRZ& g) {
    const Eigen::Index nr = f.rows(), nz = g.nz;
    if (g.periodic_z()) {
        detail::ZSpectrum s = detail::z_fft(f);
        for (Eigen::Index m = 0; m < nz; ++m)
            s.modes.col(m) *= std::complex<double>(0.0, detail::z_wavenumber(m, nz));
        return detail::z_ifft(s);
    }
    ArrayXXd out(nr, nz);
    const double c = 1.0 / (2.0 * g.hz);
    out.col(0) = c * (f.col(1) - (-f.col(1)));
    for (Eigen::Index j = 1; j + 1 < nz; ++j) out.col(j) = c * (f.col(j + 1) - f.col(j - 1));
    out.col(nz - 1) = c * ((-f.col(nz - 2)) - f.col(nz - 2));
    return out;
}

inline ArrayXXd d2dz2(const ArrayXXd& f, const GridRZ& g) {
    const Eigen::Index nr = f.rows(), nz = g.nz;
    if (g.periodic_z()) {
        detail::ZSpectrum s = detail::z_fft(f);
        for (Eigen::Index m = 0; m < nz; ++m) {
            const double k = detail::z_wavenumber(m, nz);
            s.modes.col(m) *= -k * k;
        }
        return detail::z_ifft(s);
    }
    ArrayXXd out(nr, nz);
    const double c = 1.0 / (g.hz * g.hz);
    out.col(0) = c * (f.col(1) - 2.0 * f.col(0) + (-f.col(1)));
    for (Eigen::Index j = 1; j + 1 < nz; ++j) out.col(j) = c * (f.col(j + 1) - 2.0 * f.col(j) + f.col(j - 1));
    out.col(nz - 1) = c * ((-f.col(nz - 2)) - 2.0 * f.col(nz - 1) + f.col(nz - 2));
    return out;
}

// Discrete divergence (1/r) d_r(r u_r) + d_z u_z. The radial flux r*u_r is
// reflected evenly across the axis and oddly across the outer face; this
// pairing makes the divergence of flux-function fields vanish exactly and
// is the operator the Leray projection annihilates.
inline ArrayXXd divergence(const ArrayXXd& u_r, const ArrayXXd& u_z, const GridRZ& g) {
    const Eigen::Index nr = g.nr;
    ArrayXXd flux = u_r.colwise() * g.r;
    ArrayXXd dr(nr, u_r.cols());
    const double c = 1.0 / (2.0 * g.hr);
    dr.topRows(1) = c * (flux.row(1) - flux.row(0));
    if (nr > 2) dr.middleRows(1, nr - 2) = c * (flux.bottomRows(nr - 2) - flux.topRows(nr - 2));
    dr.bottomRows(1) = c * (-flux.row(nr - 1) - flux.row(nr - 2));
    dr.colwise() /= g.r;
    return dr + ddz(u_z, g);
}

// Poloidal field from a flux/stream function: (d_z f / r, -d_r f / r).
// Exactly divergence-free under `divergence`.
inline std::pair<ArrayXXd, ArrayXXd> recover_poloidal(const ArrayXXd& f, const GridRZ& g) {
    ArrayXXd fr = ddz(f, g);
    fr.colwise() /= g.r;
    ArrayXXd fz = -ddr(f, g, Parity::Even, Parity::Odd);
    fz.colwise() /= g.r;
    return {std::move(fr), std::move(fz)};
}

// Vector Laplacian components and the flux-function operator
//   Lap_r/theta = d_rr + (1/r) d_r - 1/r^2 + d_zz   (odd components)
//   Lap_z       = d_rr + (1/r) d_r + d_zz           (even component)
//   Lap_star    = d_rr - (1/r) d_r + d_zz           (flux function)
inline ArrayXXd laplacian_odd(const ArrayXXd& f, const GridRZ& g) {
    ArrayXXd out = d2dr2(f, g, Parity::Odd) + d2dz2(f, g);
    out += ddr(f, g, Parity::Odd).colwise() / g.r;
    out -= f.colwise() / (g.r * g.r);
    return out;
}

inline ArrayXXd laplacian_even(const ArrayXXd& f, const GridRZ& g) {
    ArrayXXd out = d2dr2(f, g, Parity::Even) + d2dz2(f, g);
    out += ddr(f, g, Parity::Even).colwise() / g.r;
    return out;
}

inline ArrayXXd laplacian_star(const ArrayXXd& f, const GridRZ& g) {
    ArrayXXd out = d2dr2(f, g, Parity::Even) + d2dz2(f, g);
    out -= ddr(f, g, Parity::Even).colwise() / g.r;
    return out;
}

// Similarity drift (1/2)(c + xi . grad) f, acting componentwise; c = +1 for
// vector components, -1 for the flux function.
inline ArrayXXd drift_term(const ArrayXXd& f, const GridRZ& g, Parity axis, double c) {
    ArrayXXd out = ddr(f, g, axis).colwise() * g.r;  // xi_r = r
    out += ddz(f, g).rowwise() * g.z.transpose();    // xi_z = z
    out += c * f;
    return 0.5 * out;
}

// 4th-difference damping used as optional hyperdiffusion in ideal runs.
inline ArrayXXd fourth_difference(const ArrayXXd& f, const GridRZ& g, Parity axis) {
    ArrayXXd d2 = d2dr2(f, g, axis) * (g.hr * g.hr) + d2dz2(f, g) * (g.hz * g.hz);
    ArrayXXd d4 = d2dr2(d2, g, axis) * (g.hr * g.hr) + d2dz2(d2, g) * (g.hz * g.hz);
    return -d4;
}

// A full 3-component vector field (axis parities odd, odd, even).
struct Vec3Field {
    ArrayXXd r, th, z;
};

// u . grad v in cylindrical components, including the geometric terms.
inline Vec3Field advect(const Vec3Field& u, const Vec3Field& v, const GridRZ& g) {
    Vec3Field out;
    ArrayXXd inv_r = (1.0 / g.r).replicate(1, g.nz);
    out.r = u.r * ddr(v.r, g, Parity::Odd) + u.z * ddz(v.r, g) - u.th * v.th * inv_r;
    out.th = u.r * ddr(v.th, g, Parity::Odd) + u.z * ddz(v.th, g) + u.th * v.r * inv_r;
    out.z = u.r * ddr(v.z, g, Parity::Even) + u.z * ddz(v.z, g);
    return out;
}

// The five prognostic fields of an axisymmetric MHD state. The poloidal
// magnetic components are derived from phi; pressure is a diagnostic filled
// by the projection.
struct AxiField {
    GridRZ grid;
    Frame frame = Frame::Physical;
    ArrayXXd u_r, u_th, u_z, phi, B_th;
    ArrayXXd pressure;

    static AxiField zero(const GridRZ& g, Frame fr) {
        AxiField f;
        f.grid = g;
        f.frame = fr;
        f.u_r = ArrayXXd::Zero(g.nr, g.nz);
        f.u_th = f.u_r;
        f.u_z = f.u_r;
        f.phi = f.u_r;
        f.B_th = f.u_r;
        f.pressure = f.u_r;
        return f;
    }

    Vec3Field velocity() const { return {u_r, u_th, u_z}; }
    Vec3Field magnetic() const {
        auto [br, bz] = recover_poloidal(phi, grid);
        return {std::move(br), B_th, std::move(bz)};
    }

    AxiField& operator+=(const AxiField& o) {
        u_r += o.u_r;
        u_th += o.u_th;
        u_z += o.u_z;
        phi += o.phi;
        B_th += o.B_th;
        return *this;
    }
    AxiField& operator*=(double c) {
        u_r *= c;
        u_th *= c;
        u_z *= c;
        phi *= c;
        B_th *= c;
        return *this;
    }
    AxiField& axpy(double c, const AxiField& o) {
        u_r += c * o.u_r;
        u_th += c * o.u_th;
        u_z += c * o.u_z;
        phi += c * o.phi;
        B_th += c * o.B_th;
        return *this;
    }
};

inline AxiField operator+(AxiField a, const AxiField& b) { return a += b; }
inline AxiField operator*(double c, AxiField a) { return a *= c; }
inline AxiField operator-(AxiField a, const AxiField& b) { return a.axpy(-1.0, b); }

// Xi = (V, W) with a seminorm cache; the cache is cleared by any mutation
// done through invalidate().
struct PairState {
    AxiField f;
    mutable std::optional<ArrayXd> seminorm_cache;  // filled by sobolev_seminorms
    mutable int cache_order = -1;

    explicit PairState(AxiField field) : f(std::move(field)) {}
    PairState() = default;
    void invalidate() const {
        seminorm_cache.reset();
        cache_order = -1;
    }
};

inline double l2_norm_pair(const AxiField& s) {
    auto B = s.magnetic();
    double sq = integrate_rz(s.grid, (s.u_r * s.u_r + s.u_th * s.u_th + s.u_z * s.u_z + B.r * B.r +
                                      B.th * B.th + B.z * B.z)
                                         .eval());
    return std::sqrt(sq);
}

inline double l2_norm_velocity(const AxiField& s) {
    return std::sqrt(integrate_rz(s.grid, (s.u_r * s.u_r + s.u_th * s.u_th + s.u_z * s.u_z).eval()));
}

inline double l2_norm_magnetic(const AxiField& s) {
    auto B = s.magnetic();
    return std::sqrt(integrate_rz(s.grid, (B.r * B.r + B.th * B.th + B.z * B.z).eval()));
}

// Weighted L2 norm of the discrete divergence of the velocity pair.
inline double divergence_residual(const AxiField& s) {
    ArrayXXd d = divergence(s.u_r, s.u_z, s.grid);
    return std::sqrt(integrate_rz(s.grid, (d * d).eval()));
}

}  // namespace mhdlab
