#pragma once

// Coarse lattices with exact closest-point quantizers.
//
// Generators store basis vectors as columns, so a lattice point is B * c for
// an integer vector c. Quantizer ties are broken by rounding half-integers to
// even, and the D_n parity repair flips the lowest-index coordinate among
// those with the largest rounding error.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sidelattice/errors.hpp"

namespace sidelattice {

using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Absolute tolerance for geometric equality tests.
inline constexpr double geometry_tolerance = 1e-9;

enum class LatticeFamily { ScaledZn, ScaledDn, ScaledE8 };

inline std::string_view family_name(LatticeFamily f) noexcept {
    switch (f) {
        case LatticeFamily::ScaledZn: return "Zn";
        case LatticeFamily::ScaledDn: return "Dn";
        case LatticeFamily::ScaledE8: return "E8";
    }
    return "?";
}

inline std::optional<LatticeFamily> parse_family(std::string_view s) noexcept {
    if (s == "Zn") return LatticeFamily::ScaledZn;
    if (s == "Dn") return LatticeFamily::ScaledDn;
    if (s == "E8") return LatticeFamily::ScaledE8;
    return std::nullopt;
}

namespace detail {

inline RealMatrix base_generator(LatticeFamily family, std::size_t n) {
    const auto dim = static_cast<Eigen::Index>(n);
    RealMatrix b = RealMatrix::Zero(dim, dim);
    switch (family) {
        case LatticeFamily::ScaledZn:
            b.setIdentity();
            break;
        case LatticeFamily::ScaledDn:
            // (-1,-1,0,..), (1,-1,0,..), (0,1,-1,..), ..., (0,..,1,-1)
            b(0, 0) = -1;
            b(1, 0) = -1;
            for (Eigen::Index j = 1; j < dim; ++j) {
                b(j - 1, j) = 1;
                b(j, j) = -1;
            }
            break;
        case LatticeFamily::ScaledE8:
            b(0, 0) = 2;
            for (Eigen::Index j = 1; j < 7; ++j) {
                b(j - 1, j) = -1;
                b(j, j) = 1;
            }
            for (Eigen::Index i = 0; i < 8; ++i) b(i, 7) = 0.5;
            break;
    }
    return b;
}

inline double base_covering_radius(LatticeFamily family, std::size_t n) {
    switch (family) {
        case LatticeFamily::ScaledZn: return std::sqrt(static_cast<double>(n)) / 2.0;
        // Deep holes (1,0,..,0) and (1/2,..,1/2).
        case LatticeFamily::ScaledDn: return std::max(1.0, std::sqrt(static_cast<double>(n)) / 2.0);
        case LatticeFamily::ScaledE8: return 1.0;
    }
    return 0.0;
}

inline RealVector quantize_zn(const RealVector& x) {
    return x.unaryExpr([](double v) { return std::nearbyint(v); });
}

inline RealVector quantize_dn(const RealVector& x) {
    RealVector out = quantize_zn(x);
    if (std::fmod(std::fabs(out.sum()), 2.0) == 0.0) return out;
    Eigen::Index worst = 0;
    double worst_err = -1;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double err = std::fabs(x[i] - out[i]);
        if (err > worst_err) {
            worst_err = err;
            worst = i;
        }
    }
    out[worst] += (x[worst] - out[worst] >= 0) ? 1.0 : -1.0;
    return out;
}

inline RealVector quantize_e8(const RealVector& x) {
    RealVector a = quantize_dn(x);
    RealVector b = quantize_dn((x.array() - 0.5).matrix());
    b.array() += 0.5;
    return (x - b).squaredNorm() < (x - a).squaredNorm() ? b : a;
}

}  // namespace detail

/// A coarse lattice beta * (base lattice) of one of the supported families.
class LatticeSpec {
public:
    LatticeSpec(LatticeFamily family, std::size_t n, double scale) : family_(family), n_(n), scale_(scale) {
        if (n == 0) throw DimensionMismatch("lattice dimension must be positive");
        if (family == LatticeFamily::ScaledE8 && n != 8) throw DimensionMismatch("E8 requires n = 8");
        if (family == LatticeFamily::ScaledDn && n < 2) throw DimensionMismatch("D_n requires n >= 2");
        if (!(scale > 0) || !std::isfinite(scale)) throw Error("lattice scale must be a positive finite number");
        generator_ = scale * detail::base_generator(family, n);
        inverse_ = generator_.inverse();
    }

    LatticeFamily family() const noexcept { return family_; }
    std::size_t dimension() const noexcept { return n_; }
    double scale() const noexcept { return scale_; }
    const RealMatrix& generator() const noexcept { return generator_; }
    const RealMatrix& inverse_generator() const noexcept { return inverse_; }

    /// Nearest lattice point.
    RealVector quantize(const RealVector& x) const {
        check_dim(x);
        const RealVector u = x / scale_;
        switch (family_) {
            case LatticeFamily::ScaledDn: return detail::quantize_dn(u) * scale_;
            case LatticeFamily::ScaledE8: return detail::quantize_e8(u) * scale_;
            case LatticeFamily::ScaledZn: break;
        }
        return detail::quantize_zn(u) * scale_;
    }

    /// x - Q(x), a point of the fundamental Voronoi region.
    RealVector mod(const RealVector& x) const { return x - quantize(x); }

    /// Membership up to the geometric tolerance (integer coefficients).
    bool contains(const RealVector& x, double tol = geometry_tolerance) const {
        check_dim(x);
        const RealVector c = inverse_ * x;
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            if (std::fabs(c[i] - std::nearbyint(c[i])) > tol) return false;
        }
        return true;
    }

    double volume() const { return std::fabs(generator_.determinant()); }
    double covering_radius() const { return scale_ * detail::base_covering_radius(family_, n_); }

    void check_dim(const RealVector& x) const {
        if (static_cast<std::size_t>(x.size()) != n_) {
            throw DimensionMismatch("vector of dimension " + std::to_string(x.size()) + " given to a " +
                                    std::to_string(n_) + "-dimensional lattice");
        }
    }

private:
    LatticeFamily family_;
    std::size_t n_;
    double scale_;
    RealMatrix generator_;
    RealMatrix inverse_;
};

inline RealVector quantize(const LatticeSpec& lattice, const RealVector& x) { return lattice.quantize(x); }
inline RealVector mod_lattice(const LatticeSpec& lattice, const RealVector& x) { return lattice.mod(x); }

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(std::size_t n) {
    const double h = static_cast<double>(n) / 2.0;
    return std::exp(h * std::log(std::numbers::pi) - std::lgamma(h + 1.0));
}

struct LatticeGeometry {
    double volume;
    double r_eff;
    double r_cov;
};

inline LatticeGeometry geometry(const LatticeSpec& lattice) {
    const auto n = static_cast<double>(lattice.dimension());
    const double vol = lattice.volume();
    const double r_eff = std::exp((std::log(vol) - std::log(unit_ball_volume(lattice.dimension()))) / n);
    return {vol, r_eff, lattice.covering_radius()};
}

/// Scale the family so that its covering radius equals sqrt(n).
inline LatticeSpec scale_to_covering(LatticeFamily family, std::size_t n) {
    if (n == 0) throw DimensionMismatch("lattice dimension must be positive");
    const double target = std::sqrt(static_cast<double>(n));
    return LatticeSpec(family, n, target / detail::base_covering_radius(family, n));
}

/// Calls fn(point) for every lattice point in the closed ball B(center, r),
/// found by scanning integer coefficient vectors in a bounding box.
template <class Fn>
void for_each_point_in_ball(const LatticeSpec& lattice, const RealVector& center, double r, Fn&& fn) {
    lattice.check_dim(center);
    const auto n = static_cast<Eigen::Index>(lattice.dimension());
    const RealMatrix& inv = lattice.inverse_generator();
    const RealVector c0 = inv * center;
    std::vector<std::int64_t> lo(n), hi(n), c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double span = inv.row(i).norm() * r + geometry_tolerance;
        lo[i] = static_cast<std::int64_t>(std::ceil(c0[i] - span));
        hi[i] = static_cast<std::int64_t>(std::floor(c0[i] + span));
        if (lo[i] > hi[i]) return;
        c[i] = lo[i];
    }
    const double r2 = (r + geometry_tolerance) * (r + geometry_tolerance);
    RealVector coeff(n);
    while (true) {
        for (Eigen::Index i = 0; i < n; ++i) coeff[i] = static_cast<double>(c[i]);
        RealVector point = lattice.generator() * coeff;
        if ((point - center).squaredNorm() <= r2) fn(point);
        Eigen::Index k = 0;
        while (k < n && c[k] == hi[k]) {
            c[k] = lo[k];
            ++k;
        }
        if (k == n) return;
        ++c[k];
    }
}

/// |L intersect B(center, r)| for the closed ball; n <= 4.
inline std::size_t count_points_in_ball(const LatticeSpec& lattice, const RealVector& center, double r) {
    if (lattice.dimension() > 4) {
        throw DimensionTooLarge("exhaustive ball counting supports n <= 4, got n = " +
                                std::to_string(lattice.dimension()));
    }
    if (r < 0) throw Error("ball radius must be non-negative");
    std::size_t count = 0;
    for_each_point_in_ball(lattice, center, r, [&](const RealVector&) { ++count; });
    return count;
}

}  // namespace sidelattice
