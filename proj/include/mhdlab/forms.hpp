// Trilinear advection form, the MHD coupling bilinear map, and weighted
// cylindrical Sobolev seminorms.
#pragma once

#include "mhdlab/fields.hpp"

namespace mhdlab {

// b(u, v, w) = int (u . grad v) . w  over the axisymmetric measure 2 pi r dr dz
inline double trilinear_b(const Vec3Field& u, const Vec3Field& v, const Vec3Field& w, const GridRZ& g) {
    Vec3Field a = advect(u, v, g);
    return integrate_rz(g, (a.r * w.r + a.th * w.th + a.z * w.z).eval());
}

struct UnprojectedPair {
    Vec3Field vel;  // u . grad v - U . grad V
    Vec3Field mag;  // u . grad V - U . grad v
};

// The MHD coupling map: <B(P1, P2), P3> = b(u1,v2,w3) - b(U1,V2,w3)
//                                        + b(u1,V2,W3) - b(U1,v2,W3).
inline UnprojectedPair bilinear_B(const AxiField& p1, const AxiField& p2) {
    if (!p1.grid.same_shape(p2.grid)) throw std::invalid_argument("bilinear_B: grid mismatch");
    const GridRZ& g = p1.grid;
    Vec3Field u1 = p1.velocity(), U1 = p1.magnetic();
    Vec3Field v2 = p2.velocity(), V2 = p2.magnetic();
    UnprojectedPair out;
    Vec3Field a = advect(u1, v2, g), b = advect(U1, V2, g);
    out.vel = {a.r - b.r, a.th - b.th, a.z - b.z};
    Vec3Field c = advect(u1, V2, g), d = advect(U1, v2, g);
    out.mag = {c.r - d.r, c.th - d.th, c.z - d.z};
    return out;
}

inline double pair_dot(const UnprojectedPair& bp, const AxiField& p3) {
    const GridRZ& g = p3.grid;
    Vec3Field w = p3.velocity(), W = p3.magnetic();
    return integrate_rz(g, (bp.vel.r * w.r + bp.vel.th * w.th + bp.vel.z * w.z + bp.mag.r * W.r +
                            bp.mag.th * W.th + bp.mag.z * W.z)
                               .eval());
}

// The four-term trilinear combination evaluated through trilinear_b.
inline double B0_form(const AxiField& p1, const AxiField& p2, const AxiField& p3) {
    const GridRZ& g = p1.grid;
    Vec3Field u1 = p1.velocity(), U1 = p1.magnetic();
    Vec3Field v2 = p2.velocity(), V2 = p2.magnetic();
    Vec3Field w3 = p3.velocity(), W3 = p3.magnetic();
    return trilinear_b(u1, v2, w3, g) - trilinear_b(U1, V2, w3, g) + trilinear_b(u1, V2, W3, g) -
           trilinear_b(U1, v2, W3, g);
}

namespace detail {

inline void seminorm_accumulate(const ArrayXXd& comp, Parity axis0, const GridRZ& g, int N, ArrayXd& acc) {
    // d_r^i d_z^j up to total order N; each d_r flips the axis parity
    std::vector<ArrayXXd> rderivs(N + 1);
    std::vector<Parity> par(N + 1);
    rderivs[0] = comp;
    par[0] = axis0;
    for (int i = 1; i <= N; ++i) {
        par[i] = (par[i - 1] == Parity::Even) ? Parity::Odd : Parity::Even;
        rderivs[i] = ddr(rderivs[i - 1], g, par[i - 1]);
    }
    for (int i = 0; i <= N; ++i) {
        ArrayXXd d = rderivs[i];
        for (int j = 0; i + j <= N; ++j) {
            const int m = i + j;
            double binom = 1.0;
            for (int t = 0; t < i; ++t) binom = binom * double(m - t) / double(t + 1);
            acc[m] += binom * integrate_rz(g, (d * d).eval());
            if (i + j < N) d = ddz(d, g);
        }
    }
}

}  // namespace detail

// Seminorm table: entry m is the squared-sum-rooted order-m seminorm of the
// six physical components, sum_{i+j=m} C(m,i) |d_r^i d_z^j c|_{L2(r)}^2.
inline ArrayXd sobolev_seminorms(const PairState& s, int N) {
    if (N > 4) throw std::invalid_argument("sobolev_seminorms: N <= 4 supported");
    if (s.seminorm_cache && s.cache_order >= N) return s.seminorm_cache->head(N + 1);
    const GridRZ& g = s.f.grid;
    ArrayXd acc = ArrayXd::Zero(N + 1);
    detail::seminorm_accumulate(s.f.u_r, Parity::Odd, g, N, acc);
    detail::seminorm_accumulate(s.f.u_th, Parity::Odd, g, N, acc);
    detail::seminorm_accumulate(s.f.u_z, Parity::Even, g, N, acc);
    Vec3Field B = s.f.magnetic();
    detail::seminorm_accumulate(B.r, Parity::Odd, g, N, acc);
    detail::seminorm_accumulate(s.f.B_th, Parity::Odd, g, N, acc);
    detail::seminorm_accumulate(B.z, Parity::Even, g, N, acc);
    ArrayXd out = acc.sqrt();
    s.seminorm_cache = out;
    s.cache_order = N;
    return out;
}

inline double hn_norm(const PairState& s, int N) {
    ArrayXd table = sobolev_seminorms(s, N);
    return std::sqrt((table * table).sum());
}

inline double hn_norm(const AxiField& f, int N) {
    PairState tmp(f);
    return hn_norm(tmp, N);
}

}  // namespace mhdlab
