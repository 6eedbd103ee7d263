// Leray projection of the poloidal velocity pair (u_r, u_z).
//
// The pressure Poisson operator is assembled as the literal composition
// L = div . grad of the discrete operators used everywhere else, so the
// projected field is divergence-free to solver accuracy at every node:
//   grad: centered d_r with even (Neumann) reflection at axis and outer
//         face; d_z spectral (periodic) or centered with odd reflection
//         (truncated, encoding p -> 0 at the z boundary).
//   div:  flux form (1/r) d_r(r u_r) + d_z u_z with even flux reflection
//         at the axis and odd at the outer face.
// Periodic grids diagonalize in z Fourier modes (radial solve per |k|,
// with the k = 0 and Nyquist modes deflated against the constant null
// vector); truncated grids use one sparse LU of the composed 2-D operator.
#pragma once

#include "mhdlab/fields.hpp"

#include <Eigen/Sparse>
#include <Eigen/QR>
#include <Eigen/LU>

#include <map>
#include <memory>

namespace mhdlab {

using SpMat = Eigen::SparseMatrix<double>;

namespace detail {

// dense nr x nr radial gradient (p-ghosts even at both ends)
inline MatrixXd radial_grad_matrix(const GridRZ& g) {
    const Eigen::Index n = g.nr;
    MatrixXd G = MatrixXd::Zero(n, n);
    const double c = 1.0 / (2.0 * g.hr);
    G(0, 1) = c;
    G(0, 0) = -c;
    for (Eigen::Index j = 1; j + 1 < n; ++j) {
        G(j, j + 1) = c;
        G(j, j - 1) = -c;
    }
    G(n - 1, n - 1) = c;
    G(n - 1, n - 2) = -c;
    return G;
}

// dense nr x nr flux divergence (even flux at axis, odd at outer face)
inline MatrixXd radial_div_matrix(const GridRZ& g) {
    const Eigen::Index n = g.nr;
    MatrixXd D = MatrixXd::Zero(n, n);
    const double c = 1.0 / (2.0 * g.hr);
    D(0, 1) = c * g.r[1] / g.r[0];
    D(0, 0) = -c;
    for (Eigen::Index j = 1; j + 1 < n; ++j) {
        D(j, j + 1) = c * g.r[j + 1] / g.r[j];
        D(j, j - 1) = -c * g.r[j - 1] / g.r[j];
    }
    D(n - 1, n - 1) = -c;
    D(n - 1, n - 2) = -c * g.r[n - 2] / g.r[n - 1];
    return D;
}

// nz x nz centered z-derivative with odd reflection at both boundary nodes
inline MatrixXd z_deriv_matrix_truncated(const GridRZ& g) {
    const Eigen::Index n = g.nz;
    MatrixXd A = MatrixXd::Zero(n, n);
    const double c = 1.0 / (2.0 * g.hz);
    A(0, 1) = 2.0 * c;
    for (Eigen::Index j = 1; j + 1 < n; ++j) {
        A(j, j + 1) = c;
        A(j, j - 1) = -c;
    }
    A(n - 1, n - 2) = -2.0 * c;
    return A;
}

}  // namespace detail

class ProjectorRZ {
  public:
    explicit ProjectorRZ(const GridRZ& g) : grid_(g) {
        R_ = detail::radial_div_matrix(g) * detail::radial_grad_matrix(g);
        G_ = detail::radial_grad_matrix(g);
        if (g.periodic_z()) {
            // left null vector of R for the k = 0 deflation
            Eigen::FullPivLU<MatrixXd> lu(R_.transpose());
            lu.setThreshold(1e-10);
            MatrixXd ker = lu.kernel();
            wnull_ = ker.col(0);
            qr0_ = std::make_unique<Eigen::ColPivHouseholderQR<MatrixXd>>(R_);
        } else {
            const Eigen::Index nr = g.nr, nz = g.nz, N = nr * nz;
            MatrixXd Az = detail::z_deriv_matrix_truncated(g);
            MatrixXd Az2 = Az * Az;
            std::vector<Eigen::Triplet<double>> trips;
            trips.reserve(std::size_t(N) * 12);
            for (Eigen::Index j = 0; j < nz; ++j)
                for (Eigen::Index i = 0; i < nr; ++i) {
                    const Eigen::Index row = i + nr * j;
                    for (Eigen::Index i2 = 0; i2 < nr; ++i2)
                        if (R_(i, i2) != 0.0) trips.emplace_back(row, i2 + nr * j, R_(i, i2));
                    for (Eigen::Index j2 = 0; j2 < nz; ++j2)
                        if (Az2(j, j2) != 0.0) trips.emplace_back(row, i + nr * j2, Az2(j, j2));
                }
            L2_.resize(N, N);
            L2_.setFromTriplets(trips.begin(), trips.end());
            lu2_ = std::make_unique<Eigen::SparseLU<SpMat>>();
            lu2_->compute(L2_);
            if (lu2_->info() != Eigen::Success)
                throw std::runtime_error("ProjectorRZ: sparse factorization of div.grad failed");
        }
    }

    const GridRZ& grid() const { return grid_; }

    // Solve (R - k^2) p = rhs for integer mode k >= 0 (deflated when the
    // shift vanishes). Used by both the projection and the modal stepper.
    VectorXd solve_radial_mode(int k, const VectorXd& rhs) const {
        if (k == 0) {
            VectorXd r2 = rhs - wnull_ * (wnull_.dot(rhs) / wnull_.squaredNorm());
            return qr0_->solve(r2);
        }
        return mode_lu(k).solve(rhs);
    }

    // In-place projection; returns the pressure and stores nothing else.
    ArrayXXd project(ArrayXXd& u_r, ArrayXXd& u_z, double tol = 1e-11) const {
        return grid_.periodic_z() ? project_periodic(u_r, u_z, tol) : project_truncated(u_r, u_z, tol);
    }

    ArrayXXd project(AxiField& f, double tol = 1e-11) const {
        f.pressure = project(f.u_r, f.u_z, tol);
        return f.pressure;
    }

    const MatrixXd& radial_grad() const { return G_; }

  private:
    Eigen::SparseLU<SpMat>& mode_lu(int k) const {
        auto it = mode_lus_.find(k);
        if (it != mode_lus_.end()) return *it->second;
        SpMat A = (R_ - double(k) * double(k) * MatrixXd::Identity(grid_.nr, grid_.nr)).sparseView();
        auto lu = std::make_shared<Eigen::SparseLU<SpMat>>();
        lu->compute(A);
        if (lu->info() != Eigen::Success)
            throw std::runtime_error("ProjectorRZ: radial mode factorization failed, k=" + std::to_string(k));
        auto [pos, ok] = mode_lus_.emplace(k, std::move(lu));
        return *pos->second;
    }

    ArrayXXd project_periodic(ArrayXXd& u_r, ArrayXXd& u_z, double tol) const {
        const Eigen::Index nr = grid_.nr, nz = grid_.nz;
        detail::ZSpectrum sr = detail::z_fft(u_r), sz = detail::z_fft(u_z);
        ArrayXXcd pm(nr, nz);
        pm.setZero();
        const Eigen::Index mhalf = nz / 2;
        for (Eigen::Index m = 0; m <= mhalf; ++m) {
            const double k = detail::z_wavenumber(m, nz);
            VectorXcd ur = sr.modes.col(m).matrix(), uz = sz.modes.col(m).matrix();
            VectorXcd div = detail::radial_div_matrix(grid_) * ur + std::complex<double>(0, k) * uz;
            VectorXd pre, pim;
            const int ki = int(std::lround(std::abs(k)));
            pre = solve_radial_mode(ki, div.real());
            pim = solve_radial_mode(ki, div.imag());
            VectorXcd p = pre + std::complex<double>(0, 1) * pim;
            ur -= G_ * p;
            uz -= std::complex<double>(0, k) * p;
            sr.modes.col(m) = ur.array();
            sz.modes.col(m) = uz.array();
            pm.col(m) = p.array();
            if (m != 0 && m != mhalf) {  // conjugate mirror keeps fields real
                sr.modes.col(nz - m) = ur.array().conjugate();
                sz.modes.col(nz - m) = uz.array().conjugate();
                pm.col(nz - m) = p.array().conjugate();
            }
        }
        u_r = detail::z_ifft(sr);
        u_z = detail::z_ifft(sz);
        detail::ZSpectrum sp;
        sp.modes = pm;
        ArrayXXd p = detail::z_ifft(sp);
        check_residual(u_r, u_z, tol);
        return p;
    }

    ArrayXXd project_truncated(ArrayXXd& u_r, ArrayXXd& u_z, double tol) const {
        const Eigen::Index nr = grid_.nr, nz = grid_.nz, N = nr * nz;
        ArrayXXd div = divergence(u_r, u_z, grid_);
        VectorXd rhs = Eigen::Map<VectorXd>(div.data(), N);
        VectorXd pv = lu2_->solve(rhs);
        VectorXd res = rhs - L2_ * pv;
        if (res.norm() > 1e-10 * std::max(1.0, rhs.norm())) pv += lu2_->solve(res);
        ArrayXXd p = Eigen::Map<ArrayXXd>(pv.data(), nr, nz);
        u_r -= (G_ * p.matrix()).array();
        u_z -= ddz(p, grid_);
        check_residual(u_r, u_z, tol);
        return p;
    }

    void check_residual(const ArrayXXd& u_r, const ArrayXXd& u_z, double tol) const {
        ArrayXXd d = divergence(u_r, u_z, grid_);
        const double nrm = std::sqrt(integrate_rz(grid_, (d * d).eval()));
        const double scale =
            std::sqrt(integrate_rz(grid_, (u_r * u_r + u_z * u_z).eval()));
        if (nrm > tol * std::max(1.0, scale))
            throw std::runtime_error("leray_project: divergence residual " + fmt_g17(nrm) +
                                     " exceeds tolerance " + fmt_g17(tol));
    }

    GridRZ grid_;
    MatrixXd R_, G_;
    VectorXd wnull_;
    std::unique_ptr<Eigen::ColPivHouseholderQR<MatrixXd>> qr0_;
    mutable std::map<int, std::shared_ptr<Eigen::SparseLU<SpMat>>> mode_lus_;
    SpMat L2_;
    std::unique_ptr<Eigen::SparseLU<SpMat>> lu2_;
};

// One-off projection helper; production paths hold a ProjectorRZ.
inline ArrayXXd leray_project(ArrayXXd& u_r, ArrayXXd& u_z, const GridRZ& g, double tol = 1e-11) {
    ProjectorRZ proj(g);
    return proj.project(u_r, u_z, tol);
}

}  // namespace mhdlab
