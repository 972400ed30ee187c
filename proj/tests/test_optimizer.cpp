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


#include "lgsim/optimizer.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lgsim {
namespace {

constexpr double kPi = std::numbers::pi;
const double kTsirelson4 = 2.0 * std::numbers::sqrt2;

ValueAssignment c_odd_labels(int n_times) {
    ValueAssignment q;
    q.set(1, {1, 1, 1}).set_range(2, n_times, {1, 1, -1});
    return q;
}

SearchSpace space_of(int levels, int times, bool constrained, Budget budget = {}) {
    SearchSpace s;
    s.n_levels = levels;
    s.n_times = times;
    s.constrained = constrained;
    s.budget = budget;
    return s;
}

TEST(Assignments, EnumerateSmallCases) {
    const auto two = enumerate_assignments(2);
    ASSERT_EQ(two.size(), 2U);
    EXPECT_NE(std::find(two.begin(), two.end(), Labeling{1, -1}), two.end());
    EXPECT_NE(std::find(two.begin(), two.end(), Labeling{-1, 1}), two.end());

    const auto three = enumerate_assignments(3);
    EXPECT_EQ(three.size(), 6U);
    EXPECT_NE(std::find(three.begin(), three.end(), Labeling{1, 1, -1}), three.end());
    for (const auto &q : three) {
        EXPECT_NE(std::count(q.begin(), q.end(), 1.0), 0);
        EXPECT_NE(std::count(q.begin(), q.end(), -1.0), 0);
    }
    EXPECT_THROW(enumerate_assignments(1), std::invalid_argument);
}

TEST(Assignments, ClassesCoverEveryMinusCount) {
    const auto classes = labeling_classes(4);
    ASSERT_EQ(classes.size(), 3U);
    EXPECT_EQ(classes.front(), (Labeling{1, 1, 1, -1}));
    EXPECT_EQ(classes.back(), (Labeling{1, -1, -1, -1}));
}

TEST(Assignments, CandidatesCoverEverySlot) {
    for (bool constrained : {true, false}) {
        const auto space = space_of(3, 4, constrained);
        const auto candidates = candidate_assignments(space);
        EXPECT_FALSE(candidates.empty());
        for (const auto &q : candidates) {
            for (int slot = 1; slot <= 4; ++slot) {
                EXPECT_TRUE(q.covers(slot));
            }
        }
    }
    EXPECT_EQ(candidate_assignments(space_of(3, 4, true)).size(), 8U);
}

TEST(Preparation, NormalizedAndCoversBasis) {
    const std::vector<double> zeros(4, 0.0);
    const auto a = preparation_from_params(zeros, 3);
    EXPECT_NEAR(std::abs(a.amplitudes()(0)), 1.0, 1e-15);
    const std::vector<double> last{kPi / 2, kPi / 2, 0.3, 0.7};
    EXPECT_NEAR(std::abs(preparation_from_params(last, 3).amplitudes()(2)), 1.0, 1e-15);
    EXPECT_THROW(preparation_from_params(zeros, 4), std::invalid_argument);
}

TEST(Objective, ReproducesFixedK4Protocol) {
    const auto space = space_of(3, 4, true);
    const auto u1 = make_unitary({kPi / 2, 0.0});
    const auto u3 = make_unitary({kPi / 2, kPi / 4});
    const auto u2 = compose(dagger(u3), dagger(u1));
    std::vector<double> params;
    for (const auto &u : {u1, u2, u3}) {
        const auto g = generator_from_unitary(u);
        params.insert(params.end(), g.begin(), g.end());
    }
    EXPECT_NEAR(objective(space, c_odd_labels(4), params), 3.0, 1e-9);
}

TEST(Objective, ZeroVectorIsIdentityEvolution) {
    const auto space = space_of(3, 3, true);
    const std::vector<double> zeros(static_cast<std::size_t>(space.parameter_count()), 0.0);
    EXPECT_NEAR(objective(space, c_odd_labels(3), zeros), 1.0, 1e-12);
}

TEST(Objective, InvariantUnderGlobalPhase) {
    const auto space = space_of(3, 4, false);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    std::vector<double> params(static_cast<std::size_t>(space.parameter_count()));
    for (double &p : params) {
        p = u(rng);
    }
    ValueAssignment q;
    q.set_range(1, 4, {1, -1, -1});
    const double base = objective(space, q, params);
    // The first three entries of each generator block are its diagonal:
    // a common shift multiplies that unitary by a phase.
    for (int block = 0; block < 3; ++block) {
        auto shifted = params;
        for (int d = 0; d < 3; ++d) {
            shifted[static_cast<std::size_t>(block * 9 + d)] += 0.813;
        }
        EXPECT_NEAR(objective(space, q, shifted), base, 1e-12);
    }
}

TEST(Objective, WrongLengthThrows) {
    const std::vector<double> params(5, 0.0);
    EXPECT_THROW(objective(space_of(3, 3, true), c_odd_labels(3), params), std::invalid_argument);
}

TEST(SearchSpace, ValidatesRanges) {
    EXPECT_THROW(space_of(1, 3, true).validate(), std::invalid_argument);
    EXPECT_THROW(space_of(3, 5, true).validate(), std::invalid_argument);
    EXPECT_THROW(space_of(3, 3, true, {0, 10}).validate(), std::invalid_argument);
    EXPECT_EQ(space_of(3, 3, true).parameter_count(), 18);
    EXPECT_EQ(space_of(3, 3, false).parameter_count(), 22);
}

TEST(NelderMead, MinimizesRosenbrock) {
    const auto rosen = [](std::span<const double> x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    NelderMeadOptions opts;
    opts.max_iterations = 5000;
    opts.x_tolerance = 1e-10;
    opts.f_tolerance = 1e-14;
    const auto r = nelder_mead(rosen, {-1.2, 1.0}, opts);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x[0], 1.0, 1e-4);
    EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(NelderMead, RespectsIterationCap) {
    const auto sphere = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) {
            s += v * v;
        }
        return s;
    };
    NelderMeadOptions opts;
    opts.max_iterations = 5;
    const auto r = nelder_mead(sphere, std::vector<double>(6, 3.0), opts);
    EXPECT_EQ(r.iterations, 5);
    EXPECT_FALSE(r.converged);
}

TEST(Maximize, TwoLevelReachesTemporalTsirelsonBounds) {
    const auto k3 = maximize(space_of(2, 3, true, {8, 2000}));
    EXPECT_NEAR(k3.best_k, 1.5, 1e-4);
    EXPECT_FALSE(k3.below_target);
    const auto k4 = maximize(space_of(2, 4, false, {8, 2000}));
    EXPECT_NEAR(k4.best_k, kTsirelson4, 1e-4);
}

TEST(Maximize, DeterministicForFixedSeed) {
    const auto space = space_of(3, 3, true, {4, 500});
    const auto a = maximize(space);
    const auto b = maximize(space);
    EXPECT_EQ(a.best_k, b.best_k);
    EXPECT_EQ(a.parameters, b.parameters);
    EXPECT_EQ(a.trace, b.trace);
}

TEST(Maximize, OptimumReverifiesThroughProtocol) {
    for (bool constrained : {true, false}) {
        const auto space = space_of(3, 3, constrained, {6, 2000});
        const auto r = maximize(space);
        const auto spec = build_protocol(space, r.assignment, r.parameters);
        EXPECT_NEAR(evaluate(spec, Combination::K3).k_value, r.best_k, 1e-9);
        EXPECT_LE(std::abs(r.best_k), algebraic_bound(3));
        EXPECT_EQ(r.prep_state.has_value(), !constrained);
        EXPECT_EQ(r.trace.size(), 6U);
        EXPECT_EQ(*std::max_element(r.trace.begin(), r.trace.end()), r.best_k);
    }
}

TEST(Maximize, MonotoneInLevelsAndRestrictionCosts) {
    for (int times : {3, 4}) {
        double previous_c = -10.0;
        double previous_u = -10.0;
        for (int n : {2, 3, 4}) {
            const double c = maximize(space_of(n, times, true, {6, 2000})).best_k;
            EXPECT_GE(c, previous_c - 1e-6) << "times=" << times << " N=" << n;
            previous_c = c;
            if (times == 3) {
                const double u = maximize(space_of(n, times, false, {6, 2000})).best_k;
                EXPECT_GE(u, previous_u - 1e-6) << "N=" << n;
                EXPECT_GE(u, c - 1e-6) << "N=" << n;
                previous_u = u;
            }
            if (n >= 3) {
                EXPECT_GT(c, (times == 3 ? 1.5 : kTsirelson4) + 1e-3);
            }
        }
    }
}

} // namespace
} // namespace lgsim
