#pragma once

// AWGN channel and the receiver chain. The receiver scales y by alpha,
// strips the dither and the side-information offset, then quantizes exactly
// to the subcode lattice Lambda_S.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "sidelattice/construction_a.hpp"
#include "sidelattice/errors.hpp"
#include "sidelattice/lattice.hpp"
#include "sidelattice/side_info.hpp"

namespace sidelattice {

template <class URBG>
RealVector add_awgn(const RealVector& x, double sigma2, URBG& gen) {
    if (!(sigma2 > 0)) throw Error("noise variance must be positive");
    std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
    RealVector y = x;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += noise(gen);
    return y;
}

struct DecoderParams {
    double alpha;     // MMSE coefficient 1 / (1 + sigma^2)
    double sigma_z2;  // effective noise variance sigma^2 / (1 + sigma^2)
    double delta;     // 2^{epsilon/2} - 1
    double r_z;       // sqrt(n (1 + delta) sigma_z^2)
};

inline DecoderParams mmse_params(double sigma2, double epsilon, std::size_t n) {
    if (!(sigma2 > 0)) throw Error("noise variance must be positive");
    if (!(epsilon > 0)) throw Error("epsilon must be positive");
    DecoderParams out{};
    out.alpha = 1.0 / (1.0 + sigma2);
    out.sigma_z2 = sigma2 / (1.0 + sigma2);
    out.delta = std::exp2(epsilon / 2.0) - 1.0;
    out.r_z = std::sqrt(static_cast<double>(n) * (1.0 + out.delta) * out.sigma_z2);
    return out;
}

/// Lambda_S = union of the coset leaders t~ shifted by Lambda_c, with an exact
/// nearest-point search over all cosets.
class SubcodeLattice {
public:
    SubcodeLattice(const NestedCode& code, const FpMatrix& sub_generator, std::size_t cap = default_enumeration_cap)
        : coarse_(&code.coarse()), leaders_(enumerate_cosets(code, sub_generator, cap)) {}

    struct Nearest {
        std::uint64_t index;  // lexicographic index of w~
        RealVector point;     // closest point of Lambda_S
        double distance;
    };

    /// Closest point; ties go to the lowest coset index.
    Nearest nearest(const RealVector& y) const {
        std::uint64_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        RealVector best_point;
        for (std::size_t j = 0; j < leaders_.size(); ++j) {
            const RealVector diff = y - leaders_[j];
            const RealVector q = coarse_->quantize(diff);
            const double d2 = (diff - q).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best = j;
                best_point = leaders_[j] + q;
            }
        }
        return {best, std::move(best_point), std::sqrt(best_d2)};
    }

    const std::vector<RealVector>& leaders() const noexcept { return leaders_; }
    std::size_t size() const noexcept { return leaders_.size(); }

private:
    const LatticeSpec* coarse_;
    std::vector<RealVector> leaders_;
};

struct DecodeOutcome {
    FpMatrix w_hat;
    std::uint64_t reduced_index;  // w~ as a lexicographic index
    bool rank_event;              // G A_S rank deficient; w_hat is meaningless when set
    double residual_norm;         // ||y' - Q_{Lambda_S}(y')||
    RealVector t_hat;             // [Q_{Lambda_S}(y') + offset] mod Lambda_c
    RealVector t_hat_two_step;    // [[Q_{Lambda_S}(y')] mod Lambda_c + offset] mod Lambda_c
};

/// Decodes y with a prebuilt subcode lattice for exp.sub_generator.
inline DecodeOutcome decode(const NestedCode& code, const ExpurgationData& exp, const SubcodeLattice& subcode,
                            const RealVector& y, const DecoderParams& params) {
    code.coarse().check_dim(y);
    const auto& coarse = code.coarse();
    // B_c p^{-1} g(G v): the part of t fixed by the side information.
    const RealVector offset = code.lift(code.generator() * exp.coset_leader);
    const RealVector y_prime = params.alpha * y - offset + code.dither();
    auto nearest = subcode.nearest(y_prime);
    const std::size_t m = exp.null_basis.cols();
    FpMatrix w_hat = recover_message(exp, index_to_vector(code.field(), nearest.index, m));
    RealVector t_hat = coarse.mod(nearest.point + offset);
    RealVector t_two = coarse.mod(coarse.mod(nearest.point) + offset);
    return {std::move(w_hat), nearest.index, false, nearest.distance, std::move(t_hat), std::move(t_two)};
}

inline DecodeOutcome decode(const NestedCode& code, const ExpurgationData& exp, const RealVector& y,
                            const DecoderParams& params, std::size_t cap = default_enumeration_cap) {
    return decode(code, exp, SubcodeLattice(code, exp.sub_generator, cap), y, params);
}

/// Error predicate from the effective noise: Q_{Lambda_S}(z) lies outside Lambda_c.
inline bool error_event_from_noise(const NestedCode& code, const SubcodeLattice& subcode, const RealVector& z) {
    return !code.coarse().contains(subcode.nearest(z).point, 1e-6);
}

inline bool error_event_from_noise(const NestedCode& code, const ExpurgationData& exp, const RealVector& z,
                                   std::size_t cap = default_enumeration_cap) {
    return error_event_from_noise(code, SubcodeLattice(code, exp.sub_generator, cap), z);
}

struct NoiseTailResult {
    std::size_t trials;
    std::size_t exceedances;
    double empirical_prob;
    double bound;
    double slack;  // 5 binomial standard deviations at the bound
    bool within_bound;
};

/// exp(-n (delta - ln(1 + delta)) / 2) + exp(-n sigma^2 delta^2 / 4).
inline double noise_tail_bound(double sigma2, double epsilon, std::size_t n) {
    const double delta = std::exp2(epsilon / 2.0) - 1.0;
    const auto dn = static_cast<double>(n);
    return std::exp(-dn * (delta - std::log1p(delta)) / 2.0) + std::exp(-dn * sigma2 * delta * delta / 4.0);
}

/// Monte Carlo estimate of P(||z||^2 > n sigma_z^2 (1 + delta)) with x uniform
/// on V(coarse), compared against the analytic bound.
template <class URBG>
NoiseTailResult noise_tail_check(double sigma2, double epsilon, const LatticeSpec& coarse, std::size_t trials,
                                 URBG& gen) {
    if (trials < 10'000) throw Error("noise_tail_check needs at least 10^4 trials");
    const std::size_t n = coarse.dimension();
    const DecoderParams dp = mmse_params(sigma2, epsilon, n);
    const double threshold = dp.r_z * dp.r_z;
    const RealVector zero = RealVector::Zero(static_cast<Eigen::Index>(n));
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const RealVector x = sample_dither(coarse, gen);
        const RealVector noise = add_awgn(zero, sigma2, gen);
        const RealVector z = dp.alpha * noise - (1.0 - dp.alpha) * x;
        if (z.squaredNorm() > threshold) ++hits;
    }
    NoiseTailResult r{};
    r.trials = trials;
    r.exceedances = hits;
    r.empirical_prob = static_cast<double>(hits) / static_cast<double>(trials);
    r.bound = noise_tail_bound(sigma2, epsilon, n);
    const double pb = std::min(r.bound, 1.0);
    r.slack = 5.0 * std::sqrt(pb * (1.0 - pb) / static_cast<double>(trials));
    r.within_bound = r.empirical_prob <= r.bound + r.slack;
    return r;
}

template <class URBG>
NoiseTailResult noise_tail_check(double sigma2, double epsilon, std::size_t n, std::size_t trials, URBG& gen) {
    return noise_tail_check(sigma2, epsilon, scale_to_covering(LatticeFamily::ScaledZn, n), trials, gen);
}

}  // namespace sidelattice
