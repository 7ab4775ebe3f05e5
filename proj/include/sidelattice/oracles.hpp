#pragma once

// Brute-force reference computations used by the verification suite and the
// tests. None of these share code with the fast paths they check.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "sidelattice/fp_linalg.hpp"
#include "sidelattice/lattice.hpp"

namespace sidelattice::oracle {

struct NearestPoint {
    RealVector point;
    double distance;
    double runner_up;  // distance to the second-closest lattice point
};

/// Nearest lattice point by scanning every integer coefficient vector whose
/// image can lie within `radius` of x. radius must be at least the covering radius.
inline NearestPoint nearest_point(const RealMatrix& generator, const RealVector& x, double radius) {
    const auto n = generator.cols();
    const RealMatrix inv = generator.inverse();
    const RealVector c0 = inv * x;
    std::vector<long> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double span = inv.row(i).norm() * radius + 1e-9;
        lo[static_cast<std::size_t>(i)] = static_cast<long>(std::ceil(c0[i] - span));
        hi[static_cast<std::size_t>(i)] = static_cast<long>(std::floor(c0[i] + span));
    }
    NearestPoint best{RealVector::Zero(n), std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
    std::vector<long> c(lo);
    RealVector coeff(n);
    while (true) {
        for (Eigen::Index i = 0; i < n; ++i) coeff[i] = static_cast<double>(c[static_cast<std::size_t>(i)]);
        const RealVector pt = generator * coeff;
        const double d = (pt - x).norm();
        if (d < best.distance) {
            best.runner_up = best.distance;
            best.distance = d;
            best.point = pt;
        } else if (d < best.runner_up) {
            best.runner_up = d;
        }
        std::size_t k = 0;
        while (k < c.size() && c[k] == hi[k]) {
            c[k] = lo[k];
            ++k;
        }
        if (k == c.size()) break;
        ++c[k];
    }
    return best;
}

/// Every x in F_p^cols with m x = 0, by exhaustive scan.
inline std::vector<FpMatrix> exhaustive_kernel(const FpMatrix& m) {
    const auto& f = m.field();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < m.cols(); ++i) total *= f.modulus();
    std::vector<FpMatrix> out;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        FpMatrix v(f, m.cols(), 1);
        std::uint64_t rest = idx;
        for (std::size_t i = 0; i < m.cols(); ++i) {
            v.set(i, 0, static_cast<Residue>(rest % f.modulus()));
            rest /= f.modulus();
        }
        if ((m * v).is_zero()) out.push_back(std::move(v));
    }
    return out;
}

/// Pearson statistic against a uniform distribution over the cells.
inline double chi_square_uniform(const std::vector<std::size_t>& counts) {
    std::size_t total = 0;
    for (auto c : counts) total += c;
    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

/// Upper critical value of chi-square with `dof` degrees of freedom at significance `alpha`.
inline double chi_square_critical(double dof, double alpha) {
    return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), alpha));
}

}  // namespace sidelattice::oracle
