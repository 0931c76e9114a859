#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "fixtures.hpp"
#include "ssd/model.hpp"
#include "ssd/steepest.hpp"
#include "ssd/svd.hpp"

using namespace ssd;

TEST(SteepestMap, SignDirection) {
    EXPECT_EQ(steepest_map(Mat{{2, -3}, {0, 1}}, NormSpec::entrywise(kInf)), (Mat{{1, -1}, {0, 1}}));
}

TEST(SteepestMap, FrobeniusNormalizes) {
    Rng rng(1);
    const Mat g = fixtures::random_mat(rng, 3, 4);
    EXPECT_LE(max_abs_diff(steepest_map(g, NormSpec::entrywise(2.0)), g * (1.0 / frobenius(g))), 1e-15);
}

TEST(SteepestMap, SpectralOfPositiveDiagonal) {
    EXPECT_LE(max_abs_diff(steepest_map(Mat{{3, 0}, {0, 2}}, NormSpec::schatten(kInf)), Mat::identity(2)), 1e-15);
}

TEST(SteepestMap, EntrywiseOnePicksFirstMaximum) {
    EXPECT_EQ(steepest_map(Mat{{1, -3}, {3, 2}}, NormSpec::entrywise(1.0)), (Mat{{0, -1}, {0, 0}}));
}

TEST(SteepestMap, NuclearUsesLeadingPair) {
    const Mat d = steepest_map(Mat{{1, 0}, {0, -4}}, NormSpec::schatten(1.0));
    EXPECT_LE(max_abs_diff(d, Mat{{0, 0}, {0, -1}}), 1e-15);
}

TEST(SteepestMap, ZeroSignalGivesZero) {
    for (const auto& spec : fixtures::all_specs()) EXPECT_TRUE(steepest_map(Mat(2, 3), spec).is_zero());
    EXPECT_THROW(steepest_map(Mat{{NAN}}, NormSpec::entrywise(2.0)), std::invalid_argument);
}

TEST(SteepestMap, DualityAndUnitNormAllSpecs) {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const Mat g = fixtures::random_mat(rng, 1 + rng.below(5), 1 + rng.below(5));
        for (const auto& spec : fixtures::all_specs()) {
            const Mat d = steepest_map(g, spec);
            const double dual = dual_norm(g, spec);
            EXPECT_NEAR(norm(d, spec), 1.0, 1e-8) << spec.to_string();
            EXPECT_NEAR(inner(g, d), dual, 1e-8 * std::max(1.0, dual)) << spec.to_string();
        }
    }
}

TEST(SteepestMap, ScaleInvariant) {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const Mat g = fixtures::random_mat(rng, 3, 3);
        for (const auto& spec : fixtures::all_specs()) {
            for (double c : {0.5, 4.0, 1024.0}) {
                EXPECT_LE(max_abs_diff(steepest_map(c * g, spec), steepest_map(g, spec)), 1e-12) << spec.to_string();
            }
        }
        // Power-of-two scaling leaves every intermediate exact.
        for (const auto& spec : fixtures::all_specs()) {
            EXPECT_EQ(steepest_map(4.0 * g, spec), steepest_map(g, spec)) << spec.to_string();
            EXPECT_EQ(steepest_map(0.125 * g, spec), steepest_map(g, spec)) << spec.to_string();
        }
    }
}

TEST(SteepestMap, TwoNormFamiliesAgree) {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const Mat g = fixtures::random_mat(rng, 1 + rng.below(5), 1 + rng.below(5));
        EXPECT_LE(max_abs_diff(steepest_map(g, NormSpec::entrywise(2.0)), steepest_map(g, NormSpec::schatten(2.0))),
                  1e-8);
    }
}

TEST(SteepestMap, SpectralOnRankDeficientSignal) {
    Rng rng(5);
    const Mat u = fixtures::random_mat(rng, 4, 2);
    const Mat v = fixtures::random_mat(rng, 3, 2);
    const Mat g = matmul_nt(u, v);  // rank 2
    const Mat d = steepest_map(g, NormSpec::schatten(kInf));
    EXPECT_NEAR(schatten_norm(d, kInf), 1.0, 1e-10);
    EXPECT_NEAR(inner(g, d), schatten_norm(g, 1.0), 1e-10);
    const Svd s = jacobi_svd(d);
    EXPECT_EQ(s.rank(), 2u);
}

TEST(SteepestMap, NewtonSchulzPathMatchesSvd) {
    Rng rng(6);
    SteepestOptions ns;
    ns.newton_schulz = true;
    ns.ns_iters = 200;
    ns.ns_tol = 1e-10;
    for (int trial = 0; trial < 20; ++trial) {
        const Mat g = fixtures::random_mat(rng, 4, 3);
        EXPECT_LE(max_abs_diff(steepest_map(g, NormSpec::schatten(kInf), ns), steepest_map(g, NormSpec::schatten(kInf))),
                  1e-6);
    }
}

TEST(SingleSample, SpectralEqualsFrobeniusAtZero) {
    const Dataset ds(Mat{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {0, 1, 2}, 3);
    const auto [a, b] = single_sample_spectral_equals_frobenius(Mat(3, 3), ds, 0);
    Mat expected(3, 3);
    const double scale = std::sqrt(2.0 / 3.0);
    for (std::size_t r = 0; r < 3; ++r) expected(r, 0) = ((r == 0 ? 1.0 : 0.0) - 1.0 / 3.0) / scale;
    EXPECT_LE(max_abs_diff(a, expected), 1e-12);
    EXPECT_LE(max_abs_diff(b, expected), 1e-12);
}

TEST(SingleSample, RandomDraws) {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const Dataset ds = fixtures::random_dataset(rng, 2 + rng.below(4), 1 + rng.below(5), 8);
        const Mat w = fixtures::random_mat(rng, ds.k(), ds.d());
        for (LossKind kind : {LossKind::cross_entropy, LossKind::exponential}) {
            const auto [a, b] = single_sample_spectral_equals_frobenius(w, ds, rng.below(8), kind);
            EXPECT_LE(frobenius(a - b), 1e-6);
        }
    }
}

TEST(SingleSample, ZeroGradientRejected) {
    const Dataset ds(Mat{{0.0, 1.0}}, {0, 1}, 2);
    EXPECT_THROW(single_sample_spectral_equals_frobenius(Mat(2, 1), ds, 0), std::invalid_argument);
}
