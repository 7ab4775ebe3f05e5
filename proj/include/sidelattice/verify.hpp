#pragma once

// Self-checks of the construction: each check compares the library against a
// brute-force oracle or a closed-form bound and records what it measured.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sidelattice/channel.hpp"
#include "sidelattice/construction_a.hpp"
#include "sidelattice/fp_linalg.hpp"
#include "sidelattice/harness.hpp"
#include "sidelattice/lattice.hpp"
#include "sidelattice/oracles.hpp"
#include "sidelattice/rng.hpp"
#include "sidelattice/side_info.hpp"
#include "sidelattice/stats.hpp"

namespace sidelattice {

enum class VerifyLevel { quick, full };

struct CheckResult {
    std::string name;
    bool passed = false;
    std::map<std::string, double> stats;
    std::string detail;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CheckResult, name, passed, stats, detail)

struct VerifyReport {
    std::string level;
    std::vector<CheckResult> checks;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(VerifyReport, level, checks)

namespace checks {

inline std::size_t tier(VerifyLevel level, std::size_t quick, std::size_t full) {
    return level == VerifyLevel::full ? full : quick;
}

/// Ring axioms and inverses, exhaustively for every prime up to 97.
inline CheckResult field_axioms(VerifyLevel) {
    CheckResult r{"field_axioms", false, {}, {}};
    std::size_t failures = 0, primes = 0;
    for (std::uint64_t p = 2; p <= 97; ++p) {
        if (!is_prime(p)) continue;
        ++primes;
        PrimeField f(p);
        const auto q = static_cast<Residue>(p);
        for (Residue a = 1; a < q; ++a)
            if (f.mul(a, f.inv(a)) != 1) ++failures;
        if (p > 13) continue;
        for (Residue a = 0; a < q; ++a)
            for (Residue b = 0; b < q; ++b) {
                if (f.add(a, b) != f.add(b, a) || f.mul(a, b) != f.mul(b, a)) ++failures;
                if (f.add(a, f.neg(a)) != 0 || f.sub(a, b) != f.add(a, f.neg(b))) ++failures;
                for (Residue c = 0; c < q; ++c) {
                    if (f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c))) ++failures;
                    if (f.mul(f.mul(a, b), c) != f.mul(a, f.mul(b, c))) ++failures;
                    if (f.add(f.add(a, b), c) != f.add(a, f.add(b, c))) ++failures;
                }
            }
    }
    r.stats = {{"primes", static_cast<double>(primes)}, {"failures", static_cast<double>(failures)}};
    r.passed = failures == 0;
    return r;
}

/// Closest-point quantizers against exhaustive search, n <= 3 plus a few E8 points.
inline CheckResult quantizer_oracle(VerifyLevel level, std::uint64_t seed) {
    CheckResult r{"quantizer_oracle", false, {}, {}};
    const std::size_t points = tier(level, 200, 1000);
    Engine gen = make_stream(seed, StreamTag::verify, {1});
    std::size_t mismatches = 0, total = 0;
    struct Case { LatticeFamily family; std::size_t n; double scale; };
    const std::vector<Case> cases = {{LatticeFamily::ScaledZn, 1, 1.0}, {LatticeFamily::ScaledZn, 2, 1.0},
                                     {LatticeFamily::ScaledZn, 3, 2.0}, {LatticeFamily::ScaledDn, 2, 1.0},
                                     {LatticeFamily::ScaledDn, 3, 1.5}};
    for (const auto& c : cases) {
        LatticeSpec lat(c.family, c.n, c.scale);
        std::uniform_real_distribution<double> coord(-4.0 * c.scale, 4.0 * c.scale);
        for (std::size_t i = 0; i < points; ++i) {
            RealVector x(static_cast<Eigen::Index>(c.n));
            for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = coord(gen);
            const RealVector q = lat.quantize(x);
            const auto ref = oracle::nearest_point(lat.generator(), x, lat.covering_radius() + 1e-6);
            ++total;
            const bool tie = ref.runner_up - ref.distance < 1e-12;
            if ((q - ref.point).norm() > 1e-9 && !(tie && std::fabs((q - x).norm() - ref.distance) < 1e-12)) {
                ++mismatches;
            }
        }
    }
    const LatticeSpec e8(LatticeFamily::ScaledE8, 8, 1.0);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    const std::size_t e8_points = tier(level, 5, 25);
    for (std::size_t i = 0; i < e8_points; ++i) {
        RealVector x(8);
        for (Eigen::Index k = 0; k < 8; ++k) x[k] = coord(gen);
        const auto ref = oracle::nearest_point(e8.generator(), x, e8.covering_radius() + 1e-6);
        ++total;
        if ((e8.quantize(x) - ref.point).norm() > 1e-9) ++mismatches;
    }
    r.stats = {{"points", static_cast<double>(total)}, {"mismatches", static_cast<double>(mismatches)}};
    r.passed = mismatches == 0;
    return r;
}

/// mod is distributive over addition and never leaves the covering ball.
inline CheckResult mod_identities(VerifyLevel level, std::uint64_t seed) {
    CheckResult r{"mod_lattice_identities", false, {}, {}};
    Engine gen = make_stream(seed, StreamTag::verify, {2});
    const std::size_t samples = tier(level, 200, 1000);
    std::size_t failures = 0;
    double worst_gap = 0;
    for (const auto& lat : {scale_to_covering(LatticeFamily::ScaledZn, 2), scale_to_covering(LatticeFamily::ScaledDn, 3),
                            scale_to_covering(LatticeFamily::ScaledE8, 8)}) {
        const auto n = static_cast<Eigen::Index>(lat.dimension());
        std::uniform_real_distribution<double> coord(-10.0, 10.0);
        std::uniform_int_distribution<int> integer(-5, 5);
        for (std::size_t i = 0; i < samples; ++i) {
            RealVector a(n), b(n), c(n);
            for (Eigen::Index k = 0; k < n; ++k) {
                a[k] = coord(gen);
                b[k] = coord(gen);
                c[k] = integer(gen);
            }
            const double gap = (lat.mod(lat.mod(a) + b) - lat.mod(a + b)).norm();
            worst_gap = std::max(worst_gap, gap);
            if (gap > 1e-12 * std::max(1.0, lat.scale() * 10)) ++failures;
            if (lat.mod(a).norm() > lat.covering_radius() + 1e-9) ++failures;
            if (lat.mod(lat.generator() * c).norm() > 1e-12) ++failures;
            if (!lat.contains(lat.quantize(a))) ++failures;
        }
    }
    r.stats = {{"failures", static_cast<double>(failures)}, {"worst_distributivity_gap", worst_gap}};
    r.passed = failures == 0;
    return r;
}

/// Lattice-point counts inside balls never exceed (V_n / Vol) (r_cov + r)^n.
inline CheckResult ball_counting(VerifyLevel, std::uint64_t seed) {
    CheckResult r{"ball_point_count_bound", false, {}, {}};
    Engine gen = make_stream(seed, StreamTag::verify, {3});
    std::uniform_real_distribution<double> coord(-3.0, 3.0), radius(0.0, 5.0);
    std::size_t violations = 0, balls = 0;
    double tightest = 0;
    for (const auto& lat : {LatticeSpec(LatticeFamily::ScaledZn, 2, 1.0), LatticeSpec(LatticeFamily::ScaledDn, 2, 1.0)}) {
        const auto geo = geometry(lat);
        for (int i = 0; i < 100; ++i) {
            RealVector center(2);
            center << coord(gen), coord(gen);
            const double rad = radius(gen);
            const double bound = unit_ball_volume(2) / geo.volume * std::pow(geo.r_cov + rad, 2);
            const auto count = static_cast<double>(count_points_in_ball(lat, center, rad));
            tightest = std::max(tightest, count / bound);
            ++balls;
            if (count > bound) ++violations;
        }
    }
    r.stats = {{"balls", static_cast<double>(balls)}, {"violations", static_cast<double>(violations)},
               {"max_count_over_bound", tightest}};
    r.passed = violations == 0;
    return r;
}

/// Empirical tail of the effective noise against the analytic bound.
inline CheckResult effective_noise_tail(VerifyLevel level, std::uint64_t seed) {
    CheckResult r{"effective_noise_tail", false, {}, {}};
    const std::size_t trials = tier(level, 10'000, 100'000);
    bool ok = true;
    std::uint64_t k = 0;
    for (std::size_t n : {4, 8, 16}) {
        for (double sigma2 : {0.25, 1.0}) {
            Engine gen = make_stream(seed, StreamTag::verify, {4, k++});
            const auto res = noise_tail_check(sigma2, 1.0, n, trials, gen);
            const std::string tag = "n" + std::to_string(n) + "_s" + format_double(sigma2);
            r.stats[tag + "_empirical"] = res.empirical_prob;
            r.stats[tag + "_bound"] = res.bound;
            ok = ok && res.within_bound;
        }
    }
    r.passed = ok;
    return r;
}

inline NestedCode fixed_code(std::size_t p, std::size_t K, std::size_t ell, std::size_t n, std::uint64_t seed,
                             std::uint64_t index, LatticeFamily family = LatticeFamily::ScaledZn) {
    PrimeField f(p);
    CodeParams params{K, ell, n, std::max(1.0, static_cast<double>(ell) * std::log2(static_cast<double>(p)) / static_cast<double>(n)),
                      1.0, f};
    Engine g = make_stream(seed, StreamTag::generator, {index});
    Engine d = make_stream(seed, StreamTag::dither, {index});
    return draw_code(params, scale_to_covering(family, n), g, d).code;
}

/// Messages map to distinct codewords for full-rank G, all inside the fine lattice.
inline CheckResult message_bijection(VerifyLevel level, std::uint64_t seed) {
    CheckResult r{"message_bijection", false, {}, {}};
    const std::size_t codes = tier(level, 10, 50);
    std::size_t bad_codes = 0, outside = 0;
    for (std::size_t c = 0; c < codes; ++c) {
        const NestedCode code = fixed_code(5, 2, 1, 8, seed, 1000 + c);
        std::vector<RealVector> ts;
        for (std::uint64_t idx = 0; idx < 25; ++idx) {
            ts.push_back(map_message_to_t(code, index_to_vector(code.field(), idx, 2)));
            if (!in_fine_lattice(code, ts.back()) || (code.coarse().mod(ts.back()) - ts.back()).norm() > 1e-9) ++outside;
        }
        bool distinct = true;
        for (std::size_t a = 0; a < ts.size(); ++a)
            for (std::size_t b = a + 1; b < ts.size(); ++b)
                if ((ts[a] - ts[b]).norm() < 1e-9) distinct = false;
        if (!distinct) ++bad_codes;
    }
    r.stats = {{"codes", static_cast<double>(codes)}, {"codes_with_collisions", static_cast<double>(bad_codes)},
               {"points_outside_fine_lattice", static_cast<double>(outside)}};
    r.passed = bad_codes == 0 && outside == 0;
    return r;
}

/// For fixed nonzero w and uniform G, the lifted point is uniform over p^{-1}Lambda_c / Lambda_c.
inline CheckResult lifted_point_uniformity(VerifyLevel level, std::uint64_t seed) {
    CheckResult r{"lifted_point_uniformity", false, {}, {}};
    const std::size_t draws = tier(level, 20'000, 100'000);
    const PrimeField f(3);
    const LatticeSpec coarse = scale_to_covering(LatticeFamily::ScaledZn, 2);
    CodeParams params{1, 1, 2, 1.0, 1.0, f};
    Engine gen = make_stream(seed, StreamTag::verify, {5});
    const FpMatrix w = FpMatrix::column(f, {1});
    std::vector<std::size_t> cells(9, 0);
    for (std::size_t i = 0; i < draws; ++i) {
        NestedCode code(params, coarse, random_matrix(f, 2, 1, gen), RealVector::Zero(2));
        const RealVector t = map_message_to_t(code, w);
        const RealVector c = coarse.inverse_generator() * t * 3.0;
        const auto a = f.reduce(static_cast<std::int64_t>(std::nearbyint(c[0])));
        const auto b = f.reduce(static_cast<std::int64_t>(std::nearbyint(c[1])));
        ++cells[a * 3 + b];
    }
    const double stat = oracle::chi_square_uniform(cells);
    const double critical = oracle::chi_square_critical(8, 1e-3);
    r.stats = {{"draws", static_cast<double>(draws)}, {"chi_square", stat}, {"critical_1e-3", critical}};
    r.passed = stat < critical;
    return r;
}

/// Dithered codewords are uniform on V(Lambda_c) and uncorrelated with t.
inline CheckResult dither_crypto_uniformity(VerifyLevel level, std::uint64_t seed) {
    CheckResult r{"dither_crypto_uniformity", false, {}, {}};
    const std::size_t trials = tier(level, 20'000, 100'000);
    const NestedCode base = fixed_code(3, 1, 1, 2, seed, 2000);
    Engine gen = make_stream(seed, StreamTag::verify, {6});
    std::uniform_int_distribution<Residue> sym(0, 2);
    // Sums for the correlation of x_i with t_j, and the moments of x.
    double sx[2] = {0, 0}, sxx[2] = {0, 0}, st[2] = {0, 0}, stt[2] = {0, 0}, sxt[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < trials; ++i) {
        NestedCode code(base.params(), base.coarse(), base.generator(), sample_dither(base.coarse(), gen));
        const FpMatrix w = FpMatrix::column(code.field(), {static_cast<std::int64_t>(sym(gen))});
        const RealVector t = map_message_to_t(code, w);
        const RealVector x = encode(code, w);
        for (int a = 0; a < 2; ++a) {
            sx[a] += x[a];
            sxx[a] += x[a] * x[a];
            st[a] += t[a];
            stt[a] += t[a] * t[a];
            for (int b = 0; b < 2; ++b) sxt[a][b] += x[a] * t[b];
        }
    }
    const double N = static_cast<double>(trials);
    double max_corr = 0, max_mean_z = 0, max_var_dev = 0;
    const double half = base.coarse().scale() / 2.0;  // V is the cube [-half, half]^2
    const double var_uniform = (2 * half) * (2 * half) / 12.0;
    for (int a = 0; a < 2; ++a) {
        const double mx = sx[a] / N, vx = sxx[a] / N - mx * mx;
        max_mean_z = std::max(max_mean_z, std::fabs(mx) / std::sqrt(var_uniform / N));
        max_var_dev = std::max(max_var_dev, std::fabs(vx - var_uniform) / var_uniform);
        for (int b = 0; b < 2; ++b) {
            const double mt = st[b] / N, vt = stt[b] / N - mt * mt;
            if (vt <= 0) continue;
            const double corr = (sxt[a][b] / N - mx * mt) / std::sqrt(vx * vt);
            max_corr = std::max(max_corr, std::fabs(corr));
        }
    }
    const double corr_bound = 5.0 / std::sqrt(N);
    r.stats = {{"trials", N}, {"max_abs_correlation", max_corr}, {"correlation_bound", corr_bound},
               {"max_mean_zscore", max_mean_z}, {"max_relative_variance_error", max_var_dev}};
    r.passed = max_corr <= corr_bound && max_mean_z <= 5.0 && max_var_dev <= 0.05;
    return r;
}

/// Rank-deficiency frequency of uniform G against p^{-(n - K ell)}.
inline CheckResult full_rank_failure(VerifyLevel level, std::uint64_t seed) {
    CheckResult r{"generator_rank_failure", false, {}, {}};
    const std::size_t draws = tier(level, 20'000, 100'000);
    const PrimeField f(5);
    Engine gen = make_stream(seed, StreamTag::verify, {7});
    std::size_t failures = 0;
    for (std::size_t i = 0; i < draws; ++i)
        if (rank(random_matrix(f, 8, 2, gen)) < 2) ++failures;
    const double bound = std::pow(5.0, -6.0);
    const double rate = static_cast<double>(failures) / static_cast<double>(draws);
    const double slack = 5.0 * binomial_sigma(bound, draws);
    r.stats = {{"draws", static_cast<double>(draws)}, {"failure_rate", rate}, {"bound", bound}};
    r.passed = rate <= bound + slack;
    return r;
}

/// Solution sets of the side-information equations contain the true message.
inline CheckResult expurgation_consistency(VerifyLevel level, std::uint64_t seed) {
    CheckResult r{"expurgation_consistency", false, {}, {}};
    const std::size_t cases = tier(level, 200, 1000);
    Engine gen = make_stream(seed, StreamTag::verify, {8});
    std::size_t failures = 0, tested = 0;
    const PrimeField f(5);
    std::uniform_int_distribution<std::size_t> kdist(2, 3), ldist(1, 2);
    for (std::size_t i = 0; i < cases; ++i) {
        const std::size_t K = kdist(gen), ell = ldist(gen);
        const std::size_t n = K * ell + 2;
        FpMatrix raw = random_matrix(f, K - 1, K, gen);
        if (rank(raw) == K) continue;
        const SideInfoMatrix S = canonicalize(raw);
        FpMatrix G = random_matrix(f, n, K * ell, gen);
        if (rank(G) < K * ell) continue;
        const FpMatrix w = random_matrix(f, K * ell, 1, gen);
        const FpMatrix system = kron_with_identity(S.matrix(), ell);
        const auto exp = expurgate(S, system * w, G, ell);
        ++tested;
        if (!(system * exp.null_basis).is_zero()) ++failures;
        if (!(system * exp.coset_leader == system * w)) ++failures;
        // w - v must lie in the column space of A_S.
        const FpMatrix diff = w - exp.coset_leader;
        if (rank(FpMatrix::hstack(exp.null_basis, diff)) != exp.null_basis.cols()) ++failures;
    }
    r.stats = {{"cases", static_cast<double>(tested)}, {"failures", static_cast<double>(failures)}};
    r.passed = failures == 0 && tested > 0;
    return r;
}

/// Subspace enumeration matches the Gaussian-binomial counts.
inline CheckResult subspace_counts(VerifyLevel) {
    CheckResult r{"subspace_enumeration", false, {}, {}};
    bool ok = true;
    for (auto [p, K, expected] : {std::tuple<std::uint64_t, std::size_t, std::size_t>{2, 2, 4}, {3, 2, 5}, {2, 3, 15}, {3, 3, 27}}) {
        const auto subs = enumerate_subspaces(PrimeField(p), K);
        bool distinct = true;
        for (std::size_t a = 0; a < subs.size(); ++a)
            for (std::size_t b = a + 1; b < subs.size(); ++b)
                if (subs[a].rank() == subs[b].rank() &&
                    rank(FpMatrix::vstack(subs[a].matrix(), subs[b].matrix())) == subs[a].rank())
                    distinct = false;
        r.stats["p" + std::to_string(p) + "_K" + std::to_string(K)] = static_cast<double>(subs.size());
        ok = ok && distinct && subs.size() == expected;
    }
    r.passed = ok;
    return r;
}

/// Noise level at which the decoding-identity check runs (roughly one trial in ten errs).
inline constexpr double identity_check_sigma2 = 0.025;

/// Decoder errors coincide trial-by-trial with the effective-noise predicate
/// Q_{Lambda_S}(z) outside Lambda_c; also checks the two forms of t-hat agree.
inline CheckResult decoding_identity(VerifyLevel level, std::uint64_t seed, double sigma2 = identity_check_sigma2) {
    CheckResult r{"decoding_error_identity", false, {}, {}};
    const std::size_t trials = tier(level, 2'000, 10'000);
    const NestedCode code = fixed_code(5, 2, 1, 4, seed, 3000);
    const PrimeField& f = code.field();
    const std::vector<FpMatrix> side = {FpMatrix(f, 0, 2), FpMatrix(f, {{1, 2}})};
    std::size_t mismatches = 0, errors = 0, form_mismatch = 0, total = 0;
    for (std::size_t s = 0; s < side.size(); ++s) {
        const SideInfoMatrix S = canonicalize(side[s]);
        const FpMatrix system = kron_with_identity(S.matrix(), 1);
        const FpMatrix basis = null_space_basis(system);
        const SubcodeLattice subcode(code, code.generator() * basis);
        const DecoderParams dp = mmse_params(sigma2, 1.0, 4);
        std::uniform_int_distribution<Residue> sym(0, f.modulus() - 1);
        for (std::size_t t = 0; t < trials; ++t) {
            Engine gen = make_stream(seed, StreamTag::verify, {9, s, t});
            FpMatrix w(f, 2, 1);
            w.set(0, 0, sym(gen));
            w.set(1, 0, sym(gen));
            const RealVector x = encode(code, w);
            const RealVector noise = add_awgn(RealVector::Zero(4), sigma2, gen);
            const RealVector y = x + noise;
            const auto exp = expurgate(S, system * w, code.generator(), 1);
            const auto out = decode(code, exp, subcode, y, dp);
            const bool err = !(out.w_hat == w);
            const RealVector z = dp.alpha * noise - (1.0 - dp.alpha) * x;
            const bool predicted = error_event_from_noise(code, subcode, z);
            ++total;
            if (err) ++errors;
            if (err != predicted) ++mismatches;
            if ((out.t_hat - out.t_hat_two_step).norm() > 1e-9 ||
                (out.t_hat - map_message_to_t(code, out.w_hat)).norm() > 1e-9)
                ++form_mismatch;
        }
    }
    r.stats = {{"trials", static_cast<double>(total)}, {"errors", static_cast<double>(errors)},
               {"identity_mismatches", static_cast<double>(mismatches)},
               {"t_hat_form_mismatches", static_cast<double>(form_mismatch)}};
    r.passed = mismatches == 0 && form_mismatch == 0 && errors > 0;
    return r;
}

}  // namespace checks

inline VerifyReport verify_suite(VerifyLevel level, std::uint64_t seed = 1) {
    VerifyReport report;
    report.level = level == VerifyLevel::full ? "full" : "quick";
    auto guard = [&](auto&& fn, const char* name) {
        try {
            report.checks.push_back(fn());
        } catch (const std::exception& e) {
            report.checks.push_back({name, false, {}, std::string("exception: ") + e.what()});
        }
    };
    guard([&] { return checks::field_axioms(level); }, "field_axioms");
    guard([&] { return checks::quantizer_oracle(level, seed); }, "quantizer_oracle");
    guard([&] { return checks::mod_identities(level, seed); }, "mod_lattice_identities");
    guard([&] { return checks::message_bijection(level, seed); }, "message_bijection");
    guard([&] { return checks::lifted_point_uniformity(level, seed); }, "lifted_point_uniformity");
    guard([&] { return checks::ball_counting(level, seed); }, "ball_point_count_bound");
    guard([&] { return checks::effective_noise_tail(level, seed); }, "effective_noise_tail");
    guard([&] { return checks::dither_crypto_uniformity(level, seed); }, "dither_crypto_uniformity");
    guard([&] { return checks::full_rank_failure(level, seed); }, "generator_rank_failure");
    guard([&] { return checks::expurgation_consistency(level, seed); }, "expurgation_consistency");
    guard([&] { return checks::subspace_counts(level); }, "subspace_enumeration");
    guard([&] { return checks::decoding_identity(level, seed); }, "decoding_error_identity");
    return report;
}

}  // namespace sidelattice
