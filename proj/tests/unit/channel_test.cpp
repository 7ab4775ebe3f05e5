#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sidelattice/channel.hpp"
#include "sidelattice/rng.hpp"

using namespace sidelattice;

namespace {

NestedCode drawn(std::size_t p, std::size_t K, std::size_t ell, std::size_t n, std::uint64_t seed) {
    const PrimeField f(p);
    const CodeParams params{K, ell, n, 8.0, 1.0, f};
    Engine g = make_stream(seed, StreamTag::generator, {0});
    Engine d = make_stream(seed, StreamTag::dither, {0});
    return draw_code(params, scale_to_covering(LatticeFamily::ScaledZn, n), g, d).code;
}

// Nearest point of the fine lattice B_c p^{-1}(g(C) + pZ^n) by scanning integer
// vectors c in a box and keeping those whose residues lie in the column space of gen.
RealVector fine_lattice_oracle(const NestedCode& code, const FpMatrix& gen, const RealVector& y) {
    const auto& f = code.field();
    const std::size_t n = code.params().n;
    const double p = f.modulus();
    const RealVector c0 = code.coarse().inverse_generator() * y * p;
    const int span = static_cast<int>(p) + 2;
    std::vector<int> lo(n), c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = lo[i] = static_cast<int>(std::floor(c0[static_cast<Eigen::Index>(i)])) - span;
    double best = std::numeric_limits<double>::infinity();
    RealVector best_point;
    const std::size_t r = rank(gen);
    while (true) {
        FpMatrix residue(f, n, 1);
        RealVector cv(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            residue.set(i, 0, f.reduce(c[i]));
            cv[static_cast<Eigen::Index>(i)] = c[i];
        }
        if (rank(FpMatrix::hstack(gen, residue)) == r) {
            const RealVector pt = code.coarse().generator() * cv / p;
            const double d = (pt - y).norm();
            if (d < best) {
                best = d;
                best_point = pt;
            }
        }
        std::size_t k = 0;
        while (k < n && c[k] == lo[k] + 2 * span) {
            c[k] = lo[k];
            ++k;
        }
        if (k == n) break;
        ++c[k];
    }
    return best_point;
}

}  // namespace

TEST(Awgn, TinyNoiseLeavesInputAlmostUnchanged) {
    Engine gen = make_stream(1, StreamTag::noise, {0});
    const RealVector x = RealVector::LinSpaced(6, -1.0, 1.0);
    const RealVector y = add_awgn(x, 1e-12, gen);
    for (Eigen::Index i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-4);
}

TEST(Awgn, EmpiricalVariance) {
    Engine gen = make_stream(2, StreamTag::noise, {0});
    const RealVector zero = RealVector::Zero(10);
    double sum2 = 0;
    const std::size_t draws = 10'000;
    for (std::size_t i = 0; i < draws; ++i) sum2 += add_awgn(zero, 0.7, gen).squaredNorm();
    EXPECT_NEAR(sum2 / (draws * 10.0) / 0.7, 1.0, 0.02);
}

TEST(Awgn, ReproducibleStreams) {
    Engine a = make_stream(3, StreamTag::noise, {1, 2, 3});
    Engine b = make_stream(3, StreamTag::noise, {1, 2, 3});
    Engine c = make_stream(3, StreamTag::noise, {1, 2, 4});
    const RealVector zero = RealVector::Zero(4);
    const RealVector na = add_awgn(zero, 1.0, a);
    EXPECT_EQ(na, add_awgn(zero, 1.0, b));
    EXPECT_NE(na, add_awgn(zero, 1.0, c));
}

TEST(MmseParams, Examples) {
    const auto a = mmse_params(1.0, 1.0, 4);
    EXPECT_DOUBLE_EQ(a.alpha, 0.5);
    EXPECT_DOUBLE_EQ(a.sigma_z2, 0.5);
    EXPECT_NEAR(a.delta, std::sqrt(2.0) - 1, 1e-15);
    EXPECT_NEAR(a.r_z, 1.6818, 1e-4);
    const auto big = mmse_params(1e12, 1.0, 4);
    EXPECT_NEAR(big.alpha, 0.0, 1e-11);
    EXPECT_NEAR(big.sigma_z2, 1.0, 1e-11);
    EXPECT_THROW(mmse_params(0.0, 1.0, 4), Error);
    EXPECT_THROW(mmse_params(1.0, -1.0, 4), Error);
}

TEST(Decode, NoiselessChannelWithUnitScaling) {
    const NestedCode code = drawn(5, 2, 1, 4, 7);
    const PrimeField& f = code.field();
    DecoderParams dp = mmse_params(1.0, 1.0, 4);
    dp.alpha = 1.0;
    for (const auto& raw : {FpMatrix(f, 0, 2), FpMatrix(f, {{1, 3}})}) {
        const SideInfoMatrix s = canonicalize(raw);
        for (std::uint64_t idx = 0; idx < 25; ++idx) {
            const FpMatrix w = index_to_vector(f, idx, 2);
            const auto exp = expurgate(s, side_info_realization(s, w, 1), code.generator(), 1);
            const auto out = decode(code, exp, encode(code, w), dp);
            EXPECT_EQ(out.w_hat, w);
            EXPECT_FALSE(out.rank_event);
            EXPECT_LT(out.residual_norm, 1e-9);
            EXPECT_LT((out.t_hat - map_message_to_t(code, w)).norm(), 1e-9);
        }
    }
}

TEST(Decode, BinaryHypothesisMatchesExhaustiveSearch) {
    const NestedCode code = drawn(2, 2, 1, 3, 11);
    const PrimeField& f = code.field();
    const SideInfoMatrix s = canonicalize(FpMatrix(f, {{1, 1}}));
    const double sigma2 = 0.3;
    const DecoderParams dp = mmse_params(sigma2, 1.0, 3);
    std::size_t agree = 0, errors = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        Engine gen = make_stream(11, StreamTag::verify, {500, t});
        const FpMatrix w = random_matrix(f, 2, 1, gen);
        const RealVector y = add_awgn(encode(code, w), sigma2, gen);
        const FpMatrix u = side_info_realization(s, w, 1);
        const auto exp = expurgate(s, u, code.generator(), 1);
        const auto out = decode(code, exp, y, dp);
        // Exhaustive ML over the two candidates consistent with u: distance from
        // alpha*y + d to the nearest point of the coset t(w') + Lambda_c.
        double best = std::numeric_limits<double>::infinity();
        FpMatrix best_w(f, 2, 1);
        for (std::uint64_t idx = 0; idx < 4; ++idx) {
            const FpMatrix cand = index_to_vector(f, idx, 2);
            if (!(s.matrix() * cand == u)) continue;
            const RealVector shifted = dp.alpha * y + code.dither() - map_message_to_t(code, cand);
            const double dist = (shifted - code.coarse().quantize(shifted)).norm();
            if (dist < best - 1e-12) {
                best = dist;
                best_w = cand;
            }
        }
        agree += best_w == out.w_hat ? 1 : 0;
        errors += out.w_hat == w ? 0 : 1;
    }
    EXPECT_EQ(agree, 1000u);
    EXPECT_GT(errors, 0u);
}

TEST(SubcodeLattice, NearestMatchesFineLatticeScan) {
    const NestedCode code = drawn(3, 1, 1, 3, 5);
    const SubcodeLattice sub(code, code.generator());
    Engine gen = make_stream(5, StreamTag::verify, {501});
    std::uniform_real_distribution<double> coord(-3, 3);
    for (int i = 0; i < 200; ++i) {
        RealVector y(3);
        for (Eigen::Index k = 0; k < 3; ++k) y[k] = coord(gen);
        const RealVector ref = fine_lattice_oracle(code, code.generator(), y);
        EXPECT_NEAR(sub.nearest(y).distance, (ref - y).norm(), 1e-12);
    }
}

TEST(ErrorEvent, Examples) {
    const NestedCode code = drawn(5, 2, 1, 4, 13);
    const PrimeField& f = code.field();
    const auto exp = expurgate(canonicalize(FpMatrix(f, 0, 2)), FpMatrix(f, 0, 1), code.generator(), 1);
    const SubcodeLattice sub(code, exp.sub_generator);
    EXPECT_FALSE(error_event_from_noise(code, sub, RealVector::Zero(4)));
    RealVector c(4);
    c << 1, -2, 0, 3;
    EXPECT_FALSE(error_event_from_noise(code, exp, code.coarse().generator() * c));
    for (std::size_t j = 1; j < sub.size(); ++j) EXPECT_TRUE(error_event_from_noise(code, sub, sub.leaders()[j]));
}

TEST(Decode, ErrorIdentityHoldsTrialByTrial) {
    const NestedCode code = drawn(5, 2, 1, 4, 17);
    const PrimeField& f = code.field();
    const double sigma2 = 0.05;
    const DecoderParams dp = mmse_params(sigma2, 1.0, 4);
    const SideInfoMatrix s = canonicalize(FpMatrix(f, {{1, 2}}));
    const SubcodeLattice sub(code, code.generator() * null_space_basis(s.matrix()));
    std::size_t errors = 0;
    for (std::uint64_t t = 0; t < 2000; ++t) {
        Engine gen = make_stream(17, StreamTag::verify, {502, t});
        const FpMatrix w = random_matrix(f, 2, 1, gen);
        const RealVector x = encode(code, w);
        const RealVector noise = add_awgn(RealVector::Zero(4), sigma2, gen);
        const auto exp = expurgate(s, side_info_realization(s, w, 1), code.generator(), 1);
        const auto out = decode(code, exp, sub, x + noise, dp);
        const bool err = !(out.w_hat == w);
        errors += err ? 1 : 0;
        EXPECT_EQ(err, error_event_from_noise(code, sub, dp.alpha * noise - (1 - dp.alpha) * x)) << "trial " << t;
        EXPECT_LT((out.t_hat - out.t_hat_two_step).norm(), 1e-9);
    }
    EXPECT_GT(errors, 0u);
}

// Scaling y' and every generator by the same constant leaves the decision unchanged.
TEST(Decode, ScalingInvariance) {
    const NestedCode base = drawn(5, 2, 1, 4, 19);
    const PrimeField& f = base.field();
    const double c = 3.7;
    const NestedCode scaled(base.params(), LatticeSpec(LatticeFamily::ScaledZn, 4, base.coarse().scale() * c),
                            base.generator(), base.dither() * c);
    const SideInfoMatrix s = canonicalize(FpMatrix(f, 0, 2));
    const double sigma2 = 0.2;
    DecoderParams dp = mmse_params(sigma2, 1.0, 4);
    for (std::uint64_t t = 0; t < 300; ++t) {
        Engine gen = make_stream(19, StreamTag::verify, {503, t});
        const FpMatrix w = random_matrix(f, 2, 1, gen);
        const RealVector y = add_awgn(encode(base, w), sigma2, gen);
        const auto exp = expurgate(s, FpMatrix(f, 0, 1), base.generator(), 1);
        EXPECT_EQ(decode(base, exp, y, dp).w_hat, decode(scaled, exp, y * c, dp).w_hat);
    }
}

TEST(NoiseTail, BoundValue) {
    const double delta = std::sqrt(2.0) - 1;
    const double expected = std::exp(-8 * (delta - std::log(1 + delta)) / 2) + std::exp(-8 * delta * delta / 4);
    EXPECT_NEAR(noise_tail_bound(1.0, 1.0, 8), expected, 1e-15);
}

TEST(NoiseTail, LargeDeltaNeverExceeds) {
    Engine gen = make_stream(6, StreamTag::verify, {504});
    const auto r = noise_tail_check(1.0, 8.0, 8, 100'000, gen);
    EXPECT_EQ(r.exceedances, 0u);
    EXPECT_TRUE(r.within_bound);
}

TEST(NoiseTail, WithinBoundAcrossSizes) {
    std::uint64_t k = 0;
    for (std::size_t n : {4, 8, 16}) {
        for (double sigma2 : {0.25, 1.0}) {
            Engine gen = make_stream(7, StreamTag::verify, {505, k++});
            const auto r = noise_tail_check(sigma2, 1.0, n, 20'000, gen);
            EXPECT_TRUE(r.within_bound) << "n=" << n << " sigma2=" << sigma2 << " emp=" << r.empirical_prob
                                        << " bound=" << r.bound;
        }
    }
}

TEST(NoiseTail, RejectsTooFewTrials) {
    Engine gen = make_stream(8, StreamTag::verify, {506});
    EXPECT_THROW(noise_tail_check(1.0, 1.0, 4, 100, gen), Error);
}
