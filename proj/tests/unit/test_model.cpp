#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "fixtures.hpp"
#include "ssd/dataset.hpp"
#include "ssd/error.hpp"
#include "ssd/model.hpp"
#include "ssd/rng.hpp"

using namespace ssd;
namespace fs = std::filesystem;

namespace {

Dataset one_dim() { return Dataset(Mat{{1.0, -1.0}}, {0, 1}, 2); }

std::vector<std::size_t> iota_batch(std::size_t from, std::size_t to) {
    std::vector<std::size_t> b(to - from);
    std::iota(b.begin(), b.end(), from);
    return b;
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("ssd_model_" + name); }

}  // namespace

TEST(Dataset, ValidatesInput) {
    EXPECT_THROW(Dataset(Mat{{1, 2}}, {0, 0}, 2), std::invalid_argument);        // class 1 missing
    EXPECT_THROW(Dataset(Mat{{1, 2}}, {0, 2}, 2), std::invalid_argument);        // label out of range
    EXPECT_THROW(Dataset(Mat{{1, 2}}, {0}, 2), std::invalid_argument);           // count mismatch
    EXPECT_THROW(Dataset(Mat{{1}}, {0}, 1), std::invalid_argument);              // k < 2
    EXPECT_THROW(Dataset(Mat{{1, INFINITY}}, {0, 1}, 2), std::invalid_argument);  // non-finite
}

TEST(Dataset, RBoundAndSamples) {
    Rng rng(2);
    const Dataset ds = fixtures::random_dataset(rng, 3, 4, 12);
    EXPECT_NEAR(ds.r_bound(), recompute_r_bound(ds), 1e-12);
    double top = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < ds.d(); ++j) {
            EXPECT_EQ(ds.sample(i)[j], ds.x()(j, i));
            s += std::abs(ds.x()(j, i));
        }
        top = std::max(top, s);
    }
    EXPECT_NEAR(ds.r_bound(), top, 1e-12);
    EXPECT_NEAR(ds.scaled(2.0).r_bound(), 2.0 * ds.r_bound(), 1e-12);
}

TEST(Dataset, TextRoundTripIsBitExact) {
    Rng rng(3);
    Mat x = fixtures::random_mat(rng, 3, 7);
    x(0, 0) = 1e-310;  // subnormal
    x(1, 1) = -0.1;
    x(2, 2) = 1.0 / 3.0;
    const Dataset ds(x, {0, 1, 2, 0, 1, 2, 2}, 3);
    const auto path = temp_path("roundtrip.txt");
    write_dataset(path, ds);
    const Dataset back = read_dataset(path);
    EXPECT_EQ(back.x(), ds.x());
    EXPECT_TRUE(std::equal(back.labels().begin(), back.labels().end(), ds.labels().begin()));
    EXPECT_EQ(back.k(), 3u);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "3 7 3");

    const Mat m = fixtures::random_mat(rng, 2, 5);
    write_matrix(temp_path("m.txt"), m);
    EXPECT_EQ(read_matrix(temp_path("m.txt")), m);
}

TEST(Dataset, ReadErrorsAreConfigErrors) {
    const auto path = temp_path("bad.txt");
    {
        std::ofstream(path) << "2 2 2\n0 1.0 2.0\n1 3.0\n";
    }
    EXPECT_THROW(read_dataset(path), ConfigError);
    {
        std::ofstream(path) << "2 2 2\n0 1.0 2.0\n1 3.0 zz\n";
    }
    EXPECT_THROW(read_dataset(path), ConfigError);
    {
        std::ofstream(path) << "2 2 2\n0 1.0 2.0\n0 3.0 1.0\n";  // class 1 missing
    }
    EXPECT_THROW(read_dataset(path), ConfigError);
    EXPECT_THROW(read_dataset(temp_path("missing.txt")), ConfigError);
}

TEST(Loss, ZeroWeights) {
    Rng rng(4);
    const Dataset ds = fixtures::random_dataset(rng, 4, 3, 9);
    const Mat w(4, 3);
    EXPECT_NEAR(loss(w, ds, LossKind::cross_entropy), std::log(4.0), 1e-15);
    EXPECT_NEAR(loss(w, ds, LossKind::exponential), 3.0, 1e-15);
    EXPECT_NEAR(proxy_g(w, ds, LossKind::cross_entropy), 0.75, 1e-15);
}

TEST(Loss, MatchesSummationOracle) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Dataset ds = fixtures::random_dataset(rng, 3, 2, 4);
        const Mat w = fixtures::random_mat(rng, 3, 2);
        EXPECT_NEAR(loss(w, ds, LossKind::cross_entropy), fixtures::ce_loss_oracle(w, ds), 1e-12);
        EXPECT_NEAR(loss(w, ds, LossKind::exponential), fixtures::exp_loss_oracle(w, ds), 1e-12);
    }
}

TEST(Loss, StableForLargeLogits) {
    const Dataset ds = one_dim();
    const Mat w{{300.0}, {-300.0}};
    const double l = loss(w, ds, LossKind::cross_entropy);
    EXPECT_NEAR(l / std::exp(-600.0), 1.0, 1e-12);
    const Mat wrong{{-400.0}, {400.0}};
    EXPECT_NEAR(loss(wrong, ds, LossKind::cross_entropy), 800.0, 1e-9);
    EXPECT_GT(proxy_g(w, ds, LossKind::cross_entropy), 0.0);
}

TEST(Loss, ExponentialOverflowNamesSample) {
    const Dataset ds = one_dim();
    const Mat w{{-400.0}, {400.0}};
    try {
        loss(w, ds, LossKind::exponential);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("sample 0"), std::string::npos);
    }
    EXPECT_THROW(grad(w, ds, LossKind::exponential), NumericError);
}

TEST(Loss, ShapeMismatchRejected) {
    const Dataset ds = one_dim();
    EXPECT_THROW(loss(Mat(3, 1), ds, LossKind::cross_entropy), std::invalid_argument);
    EXPECT_THROW(grad(Mat(2, 2), ds, LossKind::cross_entropy), std::invalid_argument);
}

TEST(Loss, ParseKinds) {
    EXPECT_EQ(parse_loss("ce"), LossKind::cross_entropy);
    EXPECT_EQ(parse_loss("exponential"), LossKind::exponential);
    EXPECT_THROW(parse_loss("hinge"), ConfigError);
    EXPECT_EQ(to_string(LossKind::exponential), "exp");
}

TEST(Grad, ZeroWeightSingleSample) {
    Rng rng(6);
    const Dataset ds = fixtures::random_dataset(rng, 3, 4, 6);
    const Mat g = sample_grad(Mat(3, 4), ds, 2, LossKind::cross_entropy);
    const std::size_t y = ds.label(2);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t j = 0; j < 4; ++j) {
            const double coef = (c == y ? 1.0 : 0.0) - 1.0 / 3.0;
            EXPECT_NEAR(g(c, j), -coef * ds.x()(j, 2), 1e-15);
        }
}

TEST(Grad, CentralFiniteDifferences) {
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const Dataset ds = fixtures::random_dataset(rng, 2 + rng.below(3), 1 + rng.below(4), 6);
        const Mat w = fixtures::random_mat(rng, ds.k(), ds.d(), 0.5);
        for (LossKind kind : {LossKind::cross_entropy, LossKind::exponential}) {
            const Mat g = grad(w, ds, kind);
            for (std::size_t r = 0; r < w.rows(); ++r)
                for (std::size_t c = 0; c < w.cols(); ++c) {
                    Mat plus = w, minus = w;
                    plus(r, c) += 1e-6;
                    minus(r, c) -= 1e-6;
                    const double fd = (loss(plus, ds, kind) - loss(minus, ds, kind)) / 2e-6;
                    EXPECT_NEAR(g(r, c), fd, 1e-5);
                }
        }
    }
}

TEST(Grad, ColumnSumsVanish) {
    Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const Dataset ds = fixtures::random_dataset(rng, 4, 3, 8);
        const Mat w = fixtures::random_mat(rng, 4, 3);
        for (LossKind kind : {LossKind::cross_entropy, LossKind::exponential}) {
            const Mat g = grad(w, ds, kind);
            for (std::size_t j = 0; j < 3; ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < 4; ++c) s += g(c, j);
                EXPECT_NEAR(s, 0.0, 1e-12);
            }
        }
    }
}

TEST(Grad, FullEqualsOrderedBatchAndBatchErrors) {
    Rng rng(9);
    const Dataset ds = fixtures::random_dataset(rng, 3, 3, 9);
    const Mat w = fixtures::random_mat(rng, 3, 3);
    const auto all = iota_batch(0, 9);
    EXPECT_EQ(grad(w, ds, LossKind::cross_entropy), grad(w, ds, all, LossKind::cross_entropy));
    EXPECT_THROW(grad(w, ds, Batch{}, LossKind::cross_entropy), std::invalid_argument);
    const std::size_t bad[] = {0, 99};
    EXPECT_THROW(grad(w, ds, bad, LossKind::cross_entropy), std::invalid_argument);
}

TEST(Grad, EpochZeroSum) {
    Rng rng(10);
    const Dataset ds = fixtures::random_dataset(rng, 3, 4, 12);
    const Mat w = fixtures::random_mat(rng, 3, 4);
    for (LossKind kind : {LossKind::cross_entropy, LossKind::exponential}) {
        const Mat full = grad(w, ds, kind);
        Mat total(3, 4);
        for (std::size_t j = 0; j < 4; ++j) total += grad(w, ds, iota_batch(3 * j, 3 * j + 3), kind) - full;
        EXPECT_LE(max_abs(total), 1e-10);
    }
}

TEST(Proxy, ExponentialEqualsLossAndCrossEntropySandwich) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Dataset ds = fixtures::random_dataset(rng, 3, 3, 6);
        const Mat w = fixtures::random_mat(rng, 3, 3, 2.0);
        EXPECT_EQ(proxy_g(w, ds, LossKind::exponential), loss(w, ds, LossKind::exponential));
        const double l = loss(w, ds, LossKind::cross_entropy);
        const double g = proxy_g(w, ds, LossKind::cross_entropy);
        EXPECT_LE(g, l * (1 + 1e-12));
        EXPECT_GE(g, l * (1.0 - static_cast<double>(ds.n()) * l / 2.0) - 1e-12);
    }
}

TEST(Proxy, Stability) {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const Dataset ds = fixtures::random_dataset(rng, 3, 2, 6);
        const Mat w = fixtures::random_mat(rng, 3, 2);
        const Mat delta = fixtures::random_mat(rng, 3, 2, 0.3);
        const double g0 = proxy_g(w, ds, LossKind::cross_entropy);
        const double g1 = proxy_g(w + delta, ds, LossKind::cross_entropy);
        EXPECT_LE(g1 / g0, std::exp(2.0 * ds.r_bound() * max_abs(delta)) * (1 + 1e-12));
        const double lhs = entrywise_norm(grad(w + delta, ds, LossKind::cross_entropy) -
                                              grad(w, ds, LossKind::cross_entropy),
                                          1.0);
        EXPECT_LE(lhs, 2.0 * ds.r_bound() * std::expm1(2.0 * ds.r_bound() * max_abs(delta)) * g0 * (1 + 1e-12));
    }
}

TEST(MarginReport, HandExamplesAndOracle) {
    const Dataset two(Mat{{1.0, -1.0}}, {0, 1}, 2);
    const MarginReport rep = margin_report(Mat{{1.0}, {-1.0}}, two, NormSpec::entrywise(kInf));
    EXPECT_DOUBLE_EQ(rep.unnormalized_min, 2.0);
    EXPECT_DOUBLE_EQ(rep.normalized, 2.0);
    const MarginReport zero = margin_report(Mat(2, 1), two, NormSpec::entrywise(2.0));
    EXPECT_EQ(zero.unnormalized_min, 0.0);
    EXPECT_EQ(zero.normalized, -kInf);
    EXPECT_EQ(zero.argmin_sample, 0u);

    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const Dataset d = fixtures::random_dataset(rng, 4, 3, 10);
        const Mat w = fixtures::random_mat(rng, 4, 3);
        for (const auto& spec : fixtures::all_specs()) {
            const MarginReport r = margin_report(w, d, spec);
            EXPECT_EQ(r.unnormalized_min, fixtures::min_margin_oracle(w, d));
            EXPECT_NEAR(r.normalized * r.weight_norm, r.unnormalized_min, 1e-10);
        }
    }
}

TEST(MarginReport, LexicographicTieBreak) {
    // Samples 0 and 1 tie at margin 1; the smaller index is reported.
    const Dataset tie(Mat{{1.0, 1.0, -3.0}}, {0, 0, 1}, 2);
    const MarginReport t = margin_report(Mat{{1.0}, {0.0}}, tie, NormSpec::entrywise(2.0));
    EXPECT_EQ(t.argmin_sample, 0u);
    EXPECT_EQ(t.argmin_class, 1u);
}

TEST(MarginReport, LowLossImpliesSeparation) {
    Rng rng(14);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const Dataset ds = fixtures::separable_dataset(rng, 3, 2, 6);
        const Mat w = fixtures::random_mat(rng, 3, 2, 20.0);
        if (loss(w, ds, LossKind::cross_entropy) <= std::log(2.0) / static_cast<double>(ds.n())) {
            EXPECT_GE(margin_report(w, ds, NormSpec::entrywise(2.0)).unnormalized_min, 0.0);
            ++checked;
        }
    }
    EXPECT_GT(checked, 0);
}

TEST(NoiseBound, FullBatchAndRandomBatches) {
    Rng rng(15);
    const Dataset ds = fixtures::random_dataset(rng, 3, 3, 8);
    const Mat w = fixtures::random_mat(rng, 3, 3);
    const auto all = iota_batch(0, 8);
    const BoundCheck full = gradient_noise_bound_check(w, ds, all);
    EXPECT_EQ(full.lhs, 0.0);
    EXPECT_EQ(full.rhs, 0.0);
    EXPECT_TRUE(full.holds());

    for (int trial = 0; trial < 200; ++trial) {
        const Dataset d = fixtures::random_dataset(rng, 2 + rng.below(3), 1 + rng.below(4), 12);
        const Mat ww = fixtures::random_mat(rng, d.k(), d.d(), 2.0);
        std::vector<std::size_t> perm = iota_batch(0, 12);
        for (std::size_t i = 12; i-- > 1;) std::swap(perm[i], perm[rng.below(i + 1)]);
        const std::size_t b = std::vector<std::size_t>{1, 2, 3, 4, 6}[rng.below(5)];
        const std::vector<std::size_t> batch(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(b));
        for (LossKind kind : {LossKind::cross_entropy, LossKind::exponential}) {
            const BoundCheck c = gradient_noise_bound_check(ww, d, batch, kind);
            EXPECT_TRUE(c.holds(1e-12 * c.rhs)) << c.lhs << " > " << c.rhs;
        }
    }
    const std::size_t odd[] = {0, 1, 2};
    EXPECT_THROW(gradient_noise_bound_check(w, ds, odd), std::invalid_argument);
}
