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


#include "lgsim/measurement.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace lgsim {
namespace {

const double kHalfRoot2 = std::sqrt(2.0) / 2.0;

PureState minus_a_plus_b() {
    ComplexVector v(3);
    v << -kHalfRoot2, kHalfRoot2, 0.0;
    return PureState(v);
}

QuantumState random_state(int dim, std::mt19937_64 &rng, bool pure) {
    std::normal_distribution<double> g;
    if (pure) {
        ComplexVector v(dim);
        for (int k = 0; k < dim; ++k) {
            v(k) = Complex(g(rng), g(rng));
        }
        return PureState(v.normalized());
    }
    ComplexMatrix a(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            a(r, c) = Complex(g(rng), g(rng));
        }
    }
    ComplexMatrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix((rho + rho.adjoint()) / 2.0);
}

/// Projectors onto a rotated orthonormal basis: columns of a fixed unitary.
MeasurementModel rotated_basis(int dim, std::uint64_t seed) {
    const auto u = random_unitary(dim, seed);
    std::vector<ComplexMatrix> proj;
    std::vector<std::string> labels;
    for (int m = 0; m < dim; ++m) {
        const ComplexVector col = u.matrix().col(m);
        proj.emplace_back(col * col.adjoint());
        labels.push_back(default_label(m));
    }
    return {proj, labels};
}

TEST(MeasurementModel, ComputationalBasisLabels) {
    const auto meas = MeasurementModel::computational_basis(3);
    EXPECT_EQ(meas.outcome_count(), 3);
    EXPECT_EQ(meas.label(0), "A");
    EXPECT_EQ(meas.label(2), "C");
    EXPECT_EQ(meas.index_of("B"), 1);
    EXPECT_TRUE(meas.is_computational_basis());
    EXPECT_THROW((void)meas.index_of("Z"), std::out_of_range);
}

TEST(MeasurementModel, RejectsIncompleteOrOverlappingProjectors) {
    ComplexMatrix p0 = ComplexMatrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    EXPECT_THROW(MeasurementModel({p0}, {"A"}), InvariantViolation);
    EXPECT_THROW(MeasurementModel({p0, p0}, {"A", "B"}), InvariantViolation);
    ComplexMatrix half = ComplexMatrix::Identity(2, 2) / 2.0;
    EXPECT_THROW(MeasurementModel({half, half}, {"A", "B"}), InvariantViolation);
    ComplexMatrix p1 = ComplexMatrix::Zero(2, 2);
    p1(1, 1) = 1.0;
    EXPECT_THROW(MeasurementModel({p0, p1}, {"A", "A"}), InvariantViolation);
    EXPECT_NO_THROW(MeasurementModel({p0, p1}, {"A", "B"}));
}

TEST(ValueAssignment, LookupAndMissingSlots) {
    ValueAssignment q;
    q.set(1, {1, 1, 1}).set_range(2, 4, {1, 1, -1});
    EXPECT_TRUE(q.covers(3));
    EXPECT_FALSE(q.covers(5));
    EXPECT_EQ(q.value(4, 2), -1.0);
    EXPECT_THROW((void)q.values(5), MissingAssignment);
    EXPECT_THROW((void)q.value(2, 3), MissingAssignment);
    EXPECT_THROW(q.set(0, {1}), std::out_of_range);
}

TEST(OutcomeDistribution, Validation) {
    EXPECT_NO_THROW(OutcomeDistribution({0.25, 0.75}));
    EXPECT_THROW(OutcomeDistribution({0.5, 0.6}), InvariantViolation);
    EXPECT_THROW(OutcomeDistribution({1.2, -0.2}), InvariantViolation);
    EXPECT_THROW(OutcomeDistribution({}), InvariantViolation);
}

TEST(BlockingPattern, RejectsAllBlocked) {
    EXPECT_THROW(BlockingPattern(3, {0, 1, 2}), std::invalid_argument);
    EXPECT_THROW(BlockingPattern(3, {3}), std::out_of_range);
    EXPECT_EQ(BlockingPattern::open_only(3, 1).open_channels(), std::vector<int>{1});
}

TEST(OutcomeDistribution, Examples) {
    const auto meas = MeasurementModel::computational_basis(3);
    const auto c = outcome_distribution(PureState::basis(3, 2), meas);
    EXPECT_EQ(c[0], 0.0);
    EXPECT_EQ(c[1], 0.0);
    EXPECT_EQ(c[2], 1.0);
    const auto ab = outcome_distribution(minus_a_plus_b(), meas);
    EXPECT_NEAR(ab[0], 0.5, 1e-15);
    EXPECT_NEAR(ab[1], 0.5, 1e-15);
    EXPECT_EQ(ab[2], 0.0);
    const auto mixed = outcome_distribution(DensityMatrix::maximally_mixed(3), meas);
    for (int m = 0; m < 3; ++m) {
        EXPECT_NEAR(mixed[static_cast<std::size_t>(m)], 1.0 / 3.0, 1e-15);
    }
}

TEST(OutcomeDistribution, FloorsTinyProbabilities) {
    ComplexVector v(2);
    v << std::sqrt(1.0 - 1e-14), 1e-7;
    const auto p = outcome_distribution(PureState(v), MeasurementModel::computational_basis(2));
    EXPECT_EQ(p[1], 0.0);
    EXPECT_EQ(p[0], 1.0);
}

TEST(Collapse, Examples) {
    const auto meas = MeasurementModel::computational_basis(3);
    const auto c = PureState::basis(3, 2);
    const auto onto_c = collapse(c, meas, "C");
    EXPECT_EQ(onto_c.probability, 1.0);
    ASSERT_FALSE(onto_c.impossible());
    EXPECT_NEAR(onto_c.state->population(2), 1.0, 1e-15);

    const auto onto_a = collapse(c, meas, "A");
    EXPECT_EQ(onto_a.probability, 0.0);
    EXPECT_TRUE(onto_a.impossible());

    const auto onto_b = collapse(minus_a_plus_b(), meas, "B");
    EXPECT_NEAR(onto_b.probability, 0.5, 1e-15);
    ASSERT_FALSE(onto_b.impossible());
    EXPECT_NEAR(onto_b.state->population(1), 1.0, 1e-15);
}

TEST(Collapse, ProbabilitiesEqualDistributionEntries) {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 200; ++k) {
        const int dim = 2 + k % 4;
        const auto state = random_state(dim, rng, k % 2 == 0);
        const auto meas = k % 3 == 0 ? rotated_basis(dim, static_cast<std::uint64_t>(k))
                                     : MeasurementModel::computational_basis(dim);
        const auto dist = outcome_distribution(state, meas);
        for (int m = 0; m < dim; ++m) {
            EXPECT_EQ(collapse(state, meas, m).probability, dist[static_cast<std::size_t>(m)]);
        }
    }
}

TEST(Dephase, Examples) {
    const auto meas = MeasurementModel::computational_basis(3);
    ComplexMatrix diag = ComplexMatrix::Zero(3, 3);
    diag.diagonal() << 0.2, 0.3, 0.5;
    EXPECT_LT((dephase(DensityMatrix(diag), meas).matrix() - diag).norm(), 1e-15);

    ComplexMatrix expected = ComplexMatrix::Zero(3, 3);
    expected.diagonal() << 0.5, 0.5, 0.0;
    EXPECT_LT((dephase(minus_a_plus_b(), meas).matrix() - expected).norm(), 1e-15);

    const ComplexVector uniform = ComplexVector::Ones(3) / std::sqrt(3.0);
    const auto out = dephase(PureState(uniform), meas);
    EXPECT_LT((out.matrix() - DensityMatrix::maximally_mixed(3).matrix()).norm(), 1e-15);
}

TEST(Dephase, Idempotent) {
    std::mt19937_64 rng(14);
    for (int k = 0; k < 200; ++k) {
        const int dim = 2 + k % 4;
        const auto meas = k % 2 ? rotated_basis(dim, static_cast<std::uint64_t>(k))
                                : MeasurementModel::computational_basis(dim);
        const auto once = dephase(random_state(dim, rng, k % 3 == 0), meas);
        const auto twice = dephase(once, meas);
        EXPECT_LT((once.matrix() - twice.matrix()).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(NegativeMeasurement, Examples) {
    const auto meas = MeasurementModel::computational_basis(3);
    const auto c = PureState::basis(3, 2);
    const auto pass = negative_measurement(c, meas, BlockingPattern(3, {0, 1}));
    EXPECT_EQ(pass.probability, 1.0);
    ASSERT_FALSE(pass.impossible());
    EXPECT_NEAR(pass.state->population(2), 1.0, 1e-15);

    EXPECT_TRUE(negative_measurement(c, meas, BlockingPattern(3, {1, 2})).impossible());

    const auto b = negative_measurement(minus_a_plus_b(), meas, BlockingPattern(3, {0, 2}));
    EXPECT_NEAR(b.probability, 0.5, 1e-15);
    EXPECT_NEAR(b.state->population(1), 1.0, 1e-15);
}

TEST(NegativeMeasurement, RequiresSingleOpenChannel) {
    const auto meas = MeasurementModel::computational_basis(3);
    EXPECT_THROW(negative_measurement(PureState::basis(3, 0), meas, BlockingPattern(3, {0})),
                 std::invalid_argument);
    EXPECT_THROW(negative_measurement(PureState::basis(3, 0), meas, BlockingPattern(2, {0})), DimensionMismatch);
}

TEST(NegativeMeasurement, PassProbabilitiesSumToOne) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 1000; ++k) {
        const int dim = 2 + k % 5;
        const auto meas = MeasurementModel::computational_basis(dim);
        const auto state = random_state(dim, rng, k % 2 == 0);
        double total = 0.0;
        for (int open = 0; open < dim; ++open) {
            total += negative_measurement(state, meas, BlockingPattern::open_only(dim, open)).probability;
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

TEST(NegativeMeasurement, BlockingReconstructsDephasing) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 300; ++k) {
        const int dim = 2 + k % 4;
        const auto meas = k % 2 ? rotated_basis(dim, static_cast<std::uint64_t>(k))
                                : MeasurementModel::computational_basis(dim);
        const auto state = random_state(dim, rng, k % 3 != 0);
        ComplexMatrix mix = ComplexMatrix::Zero(dim, dim);
        for (int open = 0; open < dim; ++open) {
            const auto branch = negative_measurement(state, meas, BlockingPattern::open_only(dim, open));
            if (!branch.impossible()) {
                mix += branch.probability * branch.state->to_density().matrix();
            }
        }
        EXPECT_LT((mix - dephase(state, meas).matrix()).cwiseAbs().maxCoeff(), 1e-10);
    }
}

} // namespace
} // namespace lgsim
