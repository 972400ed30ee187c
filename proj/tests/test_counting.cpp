// Copyright 2026 The lgsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "lgsim/counting.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace lgsim {
namespace {

constexpr double kPi = std::numbers::pi;
const ProtocolPoint kK4Peak{ProtocolKind::K4, kPi / 2, kPi / 4};
const ProtocolPoint kK3Peak{ProtocolKind::K3, kPi / 4, kPi / 2};

CountingConfig config(double total, int repeats, std::uint64_t seed = 1) {
    return {total, repeats, seed};
}

TEST(SampleCounts, ZeroProbabilityChannelsStayEmpty) {
    const OutcomeDistribution dist({1.0, 0.0, 0.0});
    for (std::uint64_t r = 0; r < 50; ++r) {
        const auto c = sample_counts(dist, config(100, 2), 0, r);
        EXPECT_EQ(c[1], 0);
        EXPECT_EQ(c[2], 0);
        EXPECT_GT(c[0], 40);
        EXPECT_LT(c[0], 170);
    }
}

TEST(SampleCounts, PoissonMeanPerChannel) {
    const OutcomeDistribution dist({1.0 / 3, 1.0 / 3, 1.0 / 3});
    constexpr int kRepeats = 1000;
    std::vector<double> sum(3, 0.0);
    for (int r = 0; r < kRepeats; ++r) {
        const auto c = sample_counts(dist, config(30000, 2), 0, static_cast<std::uint64_t>(r));
        for (std::size_t m = 0; m < 3; ++m) {
            sum[m] += static_cast<double>(c[m]);
        }
    }
    // Each channel is Poisson(10000) marginally: the mean has std 100/sqrt(1000).
    const double se = 100.0 / std::sqrt(static_cast<double>(kRepeats));
    for (double s : sum) {
        EXPECT_NEAR(s / kRepeats, 10000.0, 3.0 * se);
    }
}

TEST(SampleCounts, DeterministicPerSettingAndDecorrelatedAcross) {
    const OutcomeDistribution dist({0.2, 0.3, 0.5});
    const auto cfg = config(5000, 2, 99);
    EXPECT_EQ(sample_counts(dist, cfg, 3, 7), sample_counts(dist, cfg, 3, 7));
    EXPECT_NE(sample_counts(dist, cfg, 3, 7), sample_counts(dist, cfg, 4, 7));
    EXPECT_NE(sample_counts(dist, cfg, 3, 7), sample_counts(dist, cfg, 3, 8));
    EXPECT_NE(sample_counts(dist, cfg, 3, 7), sample_counts(dist, config(5000, 2, 100), 3, 7));
}

TEST(EfficiencyCorrect, Examples) {
    const std::vector<std::int64_t> counts{50, 100, 0};
    const auto p = efficiency_correct(counts, EfficiencyModel({0.5, 1.0, 1.0}));
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.5, 1e-15);
    EXPECT_EQ(p[2], 0.0);

    const std::vector<std::int64_t> raw{3, 9, 12};
    const auto plain = efficiency_correct(raw, EfficiencyModel::uniform(3));
    EXPECT_EQ(plain[0], 3.0 / 24.0);
    EXPECT_EQ(plain[1], 9.0 / 24.0);
    EXPECT_EQ(plain[2], 12.0 / 24.0);
}

TEST(EfficiencyCorrect, RejectsBadInput) {
    const std::vector<std::int64_t> zeros{0, 0};
    EXPECT_THROW(efficiency_correct(zeros, EfficiencyModel::uniform(2)), std::invalid_argument);
    EXPECT_THROW(efficiency_correct(zeros, EfficiencyModel::uniform(3)), std::invalid_argument);
    EXPECT_THROW(EfficiencyModel({0.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(EfficiencyModel({1.2}), std::invalid_argument);
}

TEST(EfficiencyCorrect, OutputAlwaysNormalized) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::int64_t> n(0, 1000);
    std::uniform_real_distribution<double> e(0.05, 1.0);
    for (int k = 0; k < 500; ++k) {
        std::vector<std::int64_t> c{n(rng), n(rng), n(rng) + 1};
        const auto p = efficiency_correct(c, EfficiencyModel({e(rng), e(rng), e(rng)}));
        const auto s = p.probabilities();
        EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(RunningStats, MatchesTwoPassFormula) {
    RunningStats stats;
    const std::vector<double> xs{1.0, 4.0, 2.5, -3.0, 7.25};
    for (double x : xs) {
        stats.push(x);
    }
    const auto s = stats.summary();
    EXPECT_EQ(s.samples, 5);
    EXPECT_NEAR(s.mean, 2.35, 1e-12);
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - 2.35) * (x - 2.35);
    }
    EXPECT_NEAR(s.std, std::sqrt(ss / 4.0), 1e-12);
}

TEST(CountingNoise, CorrelatorsStayPhysical) {
    for (const auto &point : {kK4Peak, kK3Peak, ProtocolPoint{ProtocolKind::K4, 0.4, 1.1}}) {
        for (std::uint64_t r = 0; r < 50; ++r) {
            const auto rep = sample_report(point.spec(), point.combination(), config(200, 2), r,
                                           EfficiencyModel::uniform(3));
            for (const auto &[key, c] : rep.correlators) {
                EXPECT_LE(std::abs(c), 1.0 + 1e-12);
            }
        }
    }
}

TEST(CountingNoise, ConvergesToExactValue) {
    for (const auto &point : {kK4Peak, kK3Peak, ProtocolPoint{ProtocolKind::K3, 1.0, 0.7}}) {
        const double exact = evaluate(point.spec(), point.combination()).k_value;
        const auto s = k_with_counting_noise(point, config(1e6, 200));
        EXPECT_EQ(s.samples, 200);
        EXPECT_NEAR(s.mean, exact, 3.0 * s.std / std::sqrt(200.0) + 1e-12);
    }
}

TEST(CountingNoise, SpreadScalesWithInverseRootCounts) {
    const double s3 = k_with_counting_noise(kK4Peak, config(1e3, 300)).std;
    const double s4 = k_with_counting_noise(kK4Peak, config(1e4, 300)).std;
    const double s5 = k_with_counting_noise(kK4Peak, config(1e5, 300)).std;
    for (double ratio : {s3 / s4, s4 / s5}) {
        EXPECT_GT(ratio, std::sqrt(10.0) / 1.5);
        EXPECT_LT(ratio, std::sqrt(10.0) * 1.5);
    }
}

TEST(CountingNoise, EfficiencyCorrectionRemovesDetectorBias) {
    // Unequal detector efficiencies bias raw frequencies; correction restores
    // the ideal-detector mean.
    const ProtocolPoint point{ProtocolKind::K3, 1.0, 0.7};
    const double exact = evaluate(point.spec(), point.combination()).k_value;
    const auto s = k_with_counting_noise(point, config(1e6, 100), EfficiencyModel({0.4, 0.9, 0.6}));
    EXPECT_NEAR(s.mean, exact, 3.0 * s.std / std::sqrt(100.0) + 1e-12);
}

TEST(CountingNoise, ConfigValidation) {
    EXPECT_THROW(k_with_counting_noise(kK4Peak, config(0.5, 10)), std::invalid_argument);
    EXPECT_THROW(k_with_counting_noise(kK4Peak, config(100, 1)), std::invalid_argument);
}

TEST(Givens, RoundTripsRandomUnitaries) {
    for (std::uint64_t s = 0; s < 200; ++s) {
        const int dim = 2 + static_cast<int>(s % 4);
        const auto u = random_unitary(dim, s);
        const auto d = givens_decompose(u);
        EXPECT_EQ(d.rotations.size(), static_cast<std::size_t>(dim * (dim - 1) / 2));
        EXPECT_LT((givens_compose(d).matrix() - u.matrix()).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Givens, PlaneOrderForThreeLevels) {
    const auto d = givens_decompose(make_unitary({0.3, 1.2}));
    ASSERT_EQ(d.rotations.size(), 3U);
    EXPECT_EQ(std::make_pair(d.rotations[0].p, d.rotations[0].q), std::make_pair(0, 1));
    EXPECT_EQ(std::make_pair(d.rotations[1].p, d.rotations[1].q), std::make_pair(0, 2));
    EXPECT_EQ(std::make_pair(d.rotations[2].p, d.rotations[2].q), std::make_pair(1, 2));
}

TEST(AngleErrors, ZeroSigmaIsExact) {
    const AngleErrorModel model{7, 0.0, 2.0};
    const auto s = k_with_angle_errors(kK4Peak, model, 20, 3);
    EXPECT_NEAR(s.k.mean, 3.0, 1e-10);
    EXPECT_EQ(s.k.std, 0.0);
    EXPECT_NEAR(s.closing_correlator.mean, -1.0, 1e-10);
}

TEST(AngleErrors, DegradesButKeepsViolation) {
    const auto s = k_with_angle_errors(kK4Peak, AngleErrorModel{}, 1000, 5);
    EXPECT_EQ(s.k.samples, 1000);
    EXPECT_LT(s.k.mean, 3.0);
    EXPECT_GT(s.k.mean, 2.0 * std::numbers::sqrt2);
    EXPECT_GE(s.closing_correlator.mean, -1.0);
    EXPECT_LE(s.closing_correlator.mean, -0.95);
}

TEST(AngleErrors, LargerErrorsHurtMore) {
    const auto small = k_with_angle_errors(kK3Peak, AngleErrorModel{7, 0.1, 2.0}, 300, 9);
    const auto large = k_with_angle_errors(kK3Peak, AngleErrorModel{7, 2.0, 2.0}, 300, 9);
    EXPECT_LT(large.k.mean, small.k.mean);
    EXPECT_GT(large.k.std, small.k.std);
}

TEST(AngleErrors, ModelValidation) {
    EXPECT_THROW(k_with_angle_errors(kK4Peak, AngleErrorModel{0, 0.1, 2.0}, 10, 1), std::invalid_argument);
    EXPECT_THROW(k_with_angle_errors(kK4Peak, AngleErrorModel{7, -1.0, 2.0}, 10, 1), std::invalid_argument);
    EXPECT_THROW(k_with_angle_errors(kK4Peak, AngleErrorModel{}, 1, 1), std::invalid_argument);
}

} // namespace
} // namespace lgsim
