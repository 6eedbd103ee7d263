// Shared numerics helpers: grids, least-squares fits, quadrature, hashing,
// deterministic float formatting, and a bounded parallel-for.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mhdlab {

using Eigen::ArrayXd;
using Eigen::ArrayXXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

template <typename Scalar = double>
Eigen::Array<Scalar, Eigen::Dynamic, 1> linspace(Scalar a, Scalar b, Eigen::Index n) {
    return Eigen::Array<Scalar, Eigen::Dynamic, 1>::LinSpaced(n, a, b);
}

// Geometric node distribution on [a, b], a > 0.
template <typename Scalar = double>
Eigen::Array<Scalar, Eigen::Dynamic, 1> geomspace(Scalar a, Scalar b, Eigen::Index n) {
    if (a <= Scalar(0) || b <= a || n < 2) throw std::invalid_argument("geomspace: need 0 < a < b, n >= 2");
    Eigen::Array<Scalar, Eigen::Dynamic, 1> r(n);
    const Scalar q = std::log(b / a) / Scalar(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = a * std::exp(q * Scalar(i));
    r[n - 1] = b;
    return r;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;  // coefficient of determination
};

inline LineFit fit_line(const ArrayXd& x, const ArrayXd& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: bad sizes");
    const double n = double(x.size());
    const double mx = x.mean(), my = y.mean();
    const double sxx = ((x - mx) * (x - mx)).sum();
    const double sxy = ((x - mx) * (y - my)).sum();
    const double syy = ((y - my) * (y - my)).sum();
    LineFit f;
    if (sxx <= 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    (void)n;
    return f;
}

// Composite Simpson on a uniform grid; trapezoid correction for the last
// interval when the point count is even.
inline double simpson_uniform(const ArrayXd& f, double h) {
    const Eigen::Index n = f.size();
    if (n < 2) return 0.0;
    double s = 0.0;
    Eigen::Index last = (n % 2 == 1) ? n - 1 : n - 3;
    for (Eigen::Index i = 0; i + 2 <= last; i += 2) s += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if (n % 2 == 0) {
        if (n >= 4)
            s += h * (f[n - 2] + f[n - 1]) / 2.0;
        else
            s = h * (f[0] + f[1]) / 2.0;
    }
    return s;
}

// 64-bit FNV-1a, hex-encoded; used for run-config hashes.
inline std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// Shortest-roundtrip decimal formatting keeps CSV/JSON artifacts bit-stable.
inline std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline int max_worker_threads() {
    if (const char* env = std::getenv("MHDLAB_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

// Static-partition parallel for; honors MHDLAB_THREADS.
inline void parallel_for(int begin, int end, const std::function<void(int)>& body) {
    const int n = end - begin;
    if (n <= 0) return;
    const int nthreads = std::min(max_worker_threads(), n);
    if (nthreads == 1) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([=, &body] {
            for (int i = begin + t; i < end; i += nthreads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Finite-difference weights on arbitrary nodes (Fornberg recurrence).
// Returns weights w such that sum_i w[i] f(x[i]) ~ f^(m)(x0).
inline VectorXd fd_weights(double x0, const VectorXd& x, int m) {
    const int n = int(x.size());
    if (m >= n) throw std::invalid_argument("fd_weights: need more nodes than derivative order");
    MatrixXd c = MatrixXd::Zero(n, m + 1);
    double c1 = 1.0, c4 = x[0] - x0;
    c(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
                c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
            c(j, 0) = c4 * c(j, 0) / c3;
        }
        c1 = c2;
    }
    return c.col(m);
}

}  // namespace mhdlab
