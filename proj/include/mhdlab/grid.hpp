// Grid types: 1-D radial grids for profile/spectrum work and the (r, z)
// grid for axisymmetric fields. The (r, z) grid keeps r uniform with nodes
// offset half a cell from the axis so 1/r factors stay finite; z is either
// periodic with period 2*pi or truncated to [-Zmax, Zmax] with Dirichlet
// boundary nodes.
#pragma once

#include "mhdlab/common.hpp"

namespace mhdlab {

enum class ZTopology { Periodic, TruncatedDirichlet };
enum class Frame { Physical, Similarity };

template <typename Scalar = double>
struct GridRZT {
    using Array1 = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    Eigen::Index nr = 0, nz = 0;
    Scalar hr = 0, hz = 0;
    Scalar Rmax = 0, Zmax = 0;  // Zmax = pi for periodic (period 2*pi)
    ZTopology z_topology = ZTopology::Periodic;
    Array1 r, z;

    static GridRZT periodic(Eigen::Index nr, Eigen::Index nz, Scalar Rmax) {
        GridRZT g;
        g.nr = nr;
        g.nz = nz;
        g.Rmax = Rmax;
        g.Zmax = Scalar(EIGEN_PI);
        g.z_topology = ZTopology::Periodic;
        g.hr = Rmax / Scalar(nr);
        g.hz = Scalar(2.0 * EIGEN_PI) / Scalar(nz);
        g.r = (linspace<Scalar>(0, Scalar(nr - 1), nr) + Scalar(0.5)) * g.hr;
        g.z = linspace<Scalar>(0, Scalar(nz - 1), nz) * g.hz;
        return g;
    }

    // Truncated grid: nz nodes including both Dirichlet end nodes at -Zmax, Zmax.
    static GridRZT truncated(Eigen::Index nr, Eigen::Index nz, Scalar Rmax, Scalar Zmax) {
        if (nz < 3) throw std::invalid_argument("GridRZ: truncated z needs nz >= 3");
        GridRZT g;
        g.nr = nr;
        g.nz = nz;
        g.Rmax = Rmax;
        g.Zmax = Zmax;
        g.z_topology = ZTopology::TruncatedDirichlet;
        g.hr = Rmax / Scalar(nr);
        g.hz = Scalar(2) * Zmax / Scalar(nz - 1);
        g.r = (linspace<Scalar>(0, Scalar(nr - 1), nr) + Scalar(0.5)) * g.hr;
        g.z = linspace<Scalar>(-Zmax, Zmax, nz);
        return g;
    }

    bool periodic_z() const { return z_topology == ZTopology::Periodic; }

    // Quadrature weight of node (i, j) for the measure 2*pi*r dr dz.
    // Midpoint in r; trapezoid in z (end nodes carry half weight when truncated).
    Scalar quad_weight(Eigen::Index i, Eigen::Index j) const {
        Scalar wz = hz;
        if (!periodic_z() && (j == 0 || j == nz - 1)) wz *= Scalar(0.5);
        return Scalar(2.0 * EIGEN_PI) * r[i] * hr * wz;
    }

    Array1 z_quad_weights() const {
        Array1 w = Array1::Constant(nz, hz);
        if (!periodic_z()) {
            w[0] *= Scalar(0.5);
            w[nz - 1] *= Scalar(0.5);
        }
        return w;
    }

    bool same_shape(const GridRZT& o) const {
        return nr == o.nr && nz == o.nz && z_topology == o.z_topology &&
               std::abs(Rmax - o.Rmax) < Scalar(1e-14) && std::abs(Zmax - o.Zmax) < Scalar(1e-14);
    }
};

using GridRZ = GridRZT<double>;

// Weighted integral of a nodal function over the cylinder, measure 2*pi*r dr dz.
template <typename Scalar>
Scalar integrate_rz(const GridRZT<Scalar>& g, const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>& f) {
    const auto wz = g.z_quad_weights();
    Scalar s = 0;
    for (Eigen::Index j = 0; j < g.nz; ++j) s += wz[j] * (f.col(j) * g.r).sum();
    return Scalar(2.0 * EIGEN_PI) * g.hr * s;
}

}  // namespace mhdlab
