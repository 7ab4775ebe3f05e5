#include <gtest/gtest.h>

#include <set>

#include "sidelattice/verify.hpp"

using namespace sidelattice;

TEST(VerifySuite, QuickLevelPasses) {
    const auto report = verify_suite(VerifyLevel::quick, 1);
    std::set<std::string> names;
    for (const auto& c : report.checks) {
        names.insert(c.name);
        EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
    }
    EXPECT_EQ(names.size(), report.checks.size());
    for (const char* expected : {"message_bijection", "lifted_point_uniformity", "ball_point_count_bound", "effective_noise_tail",
                                 "dither_crypto_uniformity", "decoding_error_identity", "quantizer_oracle"}) {
        EXPECT_TRUE(names.count(expected)) << expected;
    }
    EXPECT_TRUE(report.all_passed());
}

TEST(VerifySuite, ReportSerializes) {
    const auto r = checks::subspace_counts(VerifyLevel::quick);
    const nlohmann::json j = r;
    EXPECT_EQ(j["name"], r.name);
    EXPECT_EQ(j["passed"], r.passed);
}

TEST(Oracles, ChiSquareCritical) {
    // 8 degrees of freedom at 1e-3
    EXPECT_NEAR(oracle::chi_square_critical(8, 1e-3), 26.1245, 1e-3);
    EXPECT_DOUBLE_EQ(oracle::chi_square_uniform({10, 10, 10}), 0.0);
    EXPECT_DOUBLE_EQ(oracle::chi_square_uniform({5, 15}), 5.0);
}

TEST(Oracles, NearestPointRunnerUp) {
    RealMatrix b = RealMatrix::Identity(2, 2);
    RealVector x(2);
    x << 0.5, 0.1;
    const auto r = oracle::nearest_point(b, x, 1.0);
    EXPECT_NEAR(r.distance, r.runner_up, 1e-12);
}
