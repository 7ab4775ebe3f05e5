#pragma once

// Nested lattice codes from Construction A.
//
// The fine lattice is  Lambda = B_c p^{-1} g(C) + Lambda_c  where C is the
// F_p-linear code generated by G (n x K*ell) and g lifts residues {0..p-1}
// to the same integers. Messages map to  t = [B_c p^{-1} g(G w)] mod Lambda_c
// and are sent as the dithered point  x = [t - d] mod Lambda_c.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "sidelattice/errors.hpp"
#include "sidelattice/fp_linalg.hpp"
#include "sidelattice/lattice.hpp"
#include "sidelattice/rng.hpp"

namespace sidelattice {

inline constexpr std::size_t default_enumeration_cap = 1'000'000;

/// Lower bound that the prime must meet: max{2^{2KR}, (2^{eps/4} - 1)^{-1} 2^{-R}}.
inline double prime_lower_bound(std::size_t K, double R, double epsilon) {
    const double first = std::exp2(2.0 * static_cast<double>(K) * R);
    const double second = 1.0 / ((std::exp2(epsilon / 4.0) - 1.0) * std::exp2(R));
    return std::max(first, second);
}

/// Smallest prime meeting prime_lower_bound.
inline PrimeField choose_prime(std::size_t K, double R, double epsilon) {
    if (!(R > 0) || !(epsilon > 0)) throw Error("choose_prime needs R > 0 and epsilon > 0");
    const double bound = prime_lower_bound(K, R, epsilon);
    // Relative slack absorbs exp2 rounding when the bound is an exact integer.
    const double target = std::ceil(bound * (1.0 - 1e-12));
    if (target >= static_cast<double>(PrimeField::max_modulus)) {
        throw Error("required prime exceeds 2^31 (bound " + std::to_string(bound) + ")");
    }
    return PrimeField(next_prime(static_cast<std::uint64_t>(std::max(target, 2.0))));
}

/// Largest ell with (ell/n) log2 p <= R, clipped so that K * ell < n.
inline std::size_t choose_ell(std::size_t n, const PrimeField& field, double R, std::size_t K = 1) {
    const double raw = static_cast<double>(n) * R / std::log2(static_cast<double>(field.modulus()));
    auto ell = static_cast<std::size_t>(std::floor(raw + 1e-12));
    if (ell == 0) throw RateTooSmall("n*R/log2(p) = " + std::to_string(raw) + " leaves no room for a message symbol");
    if (K > 0 && K * ell >= n) ell = (n - 1) / K;
    if (ell == 0) throw RateTooSmall("K * ell < n cannot hold with ell >= 1");
    return ell;
}

struct CodeParams {
    std::size_t K;
    std::size_t ell;
    std::size_t n;
    double R;
    double epsilon;
    PrimeField field;

    std::size_t message_length() const noexcept { return K * ell; }

    /// Rate actually carried per message, ell * log2(p) / n bits per dimension.
    double achieved_rate() const {
        return static_cast<double>(ell) * std::log2(static_cast<double>(field.modulus())) / static_cast<double>(n);
    }

    void validate() const {
        if (K == 0) throw Error("K must be at least 1");
        if (ell == 0) throw Error("ell must be at least 1");
        if (K * ell >= n) {
            throw Error("Construction A needs K*ell < n (K*ell = " + std::to_string(K * ell) +
                        ", n = " + std::to_string(n) + ")");
        }
        if (!(epsilon > 0)) throw Error("epsilon must be positive");
        if (!(R > 0)) throw Error("R must be positive");
        if (achieved_rate() > R * (1.0 + 1e-12)) {
            throw Error("ell*log2(p)/n = " + std::to_string(achieved_rate()) + " exceeds the design rate R = " +
                        std::to_string(R));
        }
    }
};

/// Index <-> F_p vector, lexicographic with the first coordinate most significant.
inline FpMatrix index_to_vector(const PrimeField& field, std::uint64_t index, std::size_t length) {
    FpMatrix v(field, length, 1);
    for (std::size_t i = length; i-- > 0;) {
        v.set(i, 0, static_cast<Residue>(index % field.modulus()));
        index /= field.modulus();
    }
    return v;
}

inline std::uint64_t vector_to_index(const FpMatrix& v) {
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < v.rows(); ++i) index = index * v.field().modulus() + v(i, 0);
    return index;
}

/// p^m, saturating to UINT64_MAX once it would pass `cap`.
inline std::uint64_t checked_power(std::uint64_t p, std::size_t m, std::uint64_t cap) {
    std::uint64_t acc = 1;
    for (std::size_t i = 0; i < m; ++i) {
        if (acc > cap / p) return std::numeric_limits<std::uint64_t>::max();
        acc *= p;
    }
    return acc;
}

class NestedCode {
public:
    NestedCode(CodeParams params, LatticeSpec coarse, FpMatrix generator, RealVector dither)
        : params_(params), coarse_(std::move(coarse)), generator_(std::move(generator)), dither_(std::move(dither)) {
        params_.validate();
        if (coarse_.dimension() != params_.n) throw DimensionMismatch("coarse lattice dimension differs from n");
        if (!(generator_.field() == params_.field)) throw DimensionMismatch("generator lives in a different field");
        if (generator_.rows() != params_.n || generator_.cols() != params_.message_length()) {
            throw DimensionMismatch("generator must be n x K*ell, got " + generator_.shape());
        }
        coarse_.check_dim(dither_);
    }

    const CodeParams& params() const noexcept { return params_; }
    const LatticeSpec& coarse() const noexcept { return coarse_; }
    const FpMatrix& generator() const noexcept { return generator_; }
    const RealVector& dither() const noexcept { return dither_; }
    const PrimeField& field() const noexcept { return params_.field; }

    /// B_c p^{-1} g(c) for a length-n codeword c over F_p.
    RealVector lift(const FpMatrix& codeword) const {
        if (codeword.rows() != params_.n || codeword.cols() != 1) {
            throw DimensionMismatch("codeword must be n x 1, got " + codeword.shape());
        }
        RealVector g(static_cast<Eigen::Index>(params_.n));
        for (std::size_t i = 0; i < params_.n; ++i) g[static_cast<Eigen::Index>(i)] = codeword(i, 0);
        return coarse_.generator() * g / static_cast<double>(params_.field.modulus());
    }

private:
    CodeParams params_;
    LatticeSpec coarse_;
    FpMatrix generator_;
    RealVector dither_;
};

/// t = [B_c p^{-1} g(G w)] mod Lambda_c.
inline RealVector map_message_to_t(const NestedCode& code, const FpMatrix& w) {
    if (w.rows() != code.params().message_length() || w.cols() != 1) {
        throw DimensionMismatch("message must be K*ell x 1, got " + w.shape());
    }
    return code.coarse().mod(code.lift(code.generator() * w));
}

/// x = [t - d] mod Lambda_c.
inline RealVector encode(const NestedCode& code, const FpMatrix& w) {
    return code.coarse().mod(map_message_to_t(code, w) - code.dither());
}

/// Coset leaders [B_c p^{-1} g(sub w~)] mod Lambda_c for every w~, in
/// lexicographic order of w~.
inline std::vector<RealVector> enumerate_cosets(const NestedCode& code, const FpMatrix& sub_generator,
                                                std::size_t cap = default_enumeration_cap) {
    const auto& field = code.field();
    if (sub_generator.rows() != code.params().n) throw DimensionMismatch("subcode generator must have n rows");
    const std::size_t m = sub_generator.cols();
    const std::uint64_t count = checked_power(field.modulus(), m, cap);
    if (count > cap) {
        throw EnumerationTooLarge("subcode has p^" + std::to_string(m) + " cosets, above the cap of " +
                                  std::to_string(cap));
    }
    std::vector<RealVector> leaders;
    leaders.reserve(count);
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        leaders.push_back(code.coarse().mod(code.lift(sub_generator * index_to_vector(field, idx, m))));
    }
    return leaders;
}

/// Uniform point of V(Lambda_c): uniform on the fundamental parallelepiped, then reduced.
template <class URBG>
RealVector sample_dither(const LatticeSpec& coarse, URBG& gen) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RealVector u(static_cast<Eigen::Index>(coarse.dimension()));
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = unit(gen);
    return coarse.mod(coarse.generator() * u);
}

inline bool check_full_rank(const NestedCode& code) {
    return rank(code.generator()) == code.params().message_length();
}

/// True when t lies in the fine lattice: p B_c^{-1} t is integral and its
/// residue vector lies in the column space of G.
inline bool in_fine_lattice(const NestedCode& code, const RealVector& t, double tol = 1e-7) {
    const auto& field = code.field();
    const RealVector scaled = code.coarse().inverse_generator() * t * static_cast<double>(field.modulus());
    FpMatrix c(field, code.params().n, 1);
    for (Eigen::Index i = 0; i < scaled.size(); ++i) {
        const double r = std::nearbyint(scaled[i]);
        if (std::fabs(scaled[i] - r) > tol) return false;
        c.set(static_cast<std::size_t>(i), 0, field.reduce(static_cast<std::int64_t>(r)));
    }
    return rank(FpMatrix::hstack(code.generator(), c)) == rank(code.generator());
}

struct DrawnCode {
    NestedCode code;
    std::size_t redraws;  // generator matrices rejected for rank deficiency
};

/// Draws G uniformly (redrawing while rank-deficient, at most max_redraws
/// times) and then an independent dither from `dither_gen`.
template <class URBG>
DrawnCode draw_code(const CodeParams& params, const LatticeSpec& coarse, URBG& generator_gen, URBG& dither_gen,
                    std::size_t max_redraws = 100) {
    params.validate();
    std::size_t redraws = 0;
    FpMatrix g = random_matrix(params.field, params.n, params.message_length(), generator_gen);
    while (rank(g) < params.message_length()) {
        if (++redraws > max_redraws) {
            throw Error("no full-rank generator after " + std::to_string(max_redraws) + " redraws");
        }
        g = random_matrix(params.field, params.n, params.message_length(), generator_gen);
    }
    RealVector d = sample_dither(coarse, dither_gen);
    return {NestedCode(params, coarse, std::move(g), std::move(d)), redraws};
}

}  // namespace sidelattice
