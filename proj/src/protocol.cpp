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

#include "lgsim/protocol.hpp"

#include <cmath>
#include <numbers>

namespace lgsim {

namespace {

constexpr int kC = 2;
const std::vector<double> kCOddLabels{+1.0, +1.0, -1.0};

QuantumState evolve(const ProtocolSpec &spec, QuantumState state, int from, int to) {
    for (int k = from; k < to; ++k) {
        state = apply(spec.unitaries[static_cast<std::size_t>(k - 1)], state);
    }
    return state;
}

void check_pair(const ProtocolSpec &spec, int i, int j) {
    if (i < 1 || j > spec.slot_count() || i >= j) {
        throw InvalidSlots("slot pair (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") must satisfy 1 <= i < j <= " + std::to_string(spec.slot_count()));
    }
    if (spec.mode(i) == SlotMode::None) {
        throw InvalidSlots("slot " + std::to_string(i) + " is never measured");
    }
    const SlotMode later = spec.mode(j);
    if (later == SlotMode::None || later == SlotMode::Preparation) {
        throw InvalidSlots("slot " + std::to_string(j) + " cannot be read out");
    }
}

void fill_row(Eigen::MatrixXd &p, int row, double weight, const OutcomeDistribution &dist) {
    for (std::size_t m = 0; m < dist.size(); ++m) {
        p(row, static_cast<Eigen::Index>(m)) = weight * dist[m];
    }
}

ProtocolSpec three_level_spec(std::vector<UnitaryMatrix> unitaries, std::vector<SlotMode> slots,
                              ValueAssignment assignment) {
    ProtocolSpec spec{PureState::basis(3, kC), std::move(unitaries), std::move(slots),
                      MeasurementModel::computational_basis(3), std::move(assignment), kC};
    spec.validate();
    return spec;
}

} // namespace

void ProtocolSpec::validate() const {
    if (slots.empty()) {
        throw InvalidSlots("protocol needs at least one time slot");
    }
    if (unitaries.size() + 1 != slots.size()) {
        throw InvalidSlots("need exactly one unitary between consecutive time slots");
    }
    const int n = dim();
    if (measurement.dim() != n) {
        throw DimensionMismatch("measurement dimension differs from state dimension");
    }
    for (const auto &u : unitaries) {
        if (u.dim() != n) {
            throw DimensionMismatch("unitary dimension differs from state dimension");
        }
    }
    for (std::size_t s = 1; s < slots.size(); ++s) {
        if (slots[s] == SlotMode::Preparation) {
            throw InvalidSlots("only slot 1 can be a preparation");
        }
    }
    if (slots.front() == SlotMode::Preparation) {
        if (preparation_outcome < 0 || preparation_outcome >= measurement.outcome_count()) {
            throw InvalidSlots("preparation slot needs a valid prepared outcome");
        }
        const double overlap = outcome_distribution(initial_state, measurement)
            [static_cast<std::size_t>(preparation_outcome)];
        if (std::abs(overlap - 1.0) > kStateTolerance) {
            throw InvariantViolation("Q(t1) = +1 mode requires the initial state to be the prepared basis state");
        }
    }
}

JointDistribution::JointDistribution(int first, int second, Eigen::MatrixXd probabilities)
    : first_(first), second_(second), p_(std::move(probabilities)) {
    if (first >= second) {
        throw InvalidSlots("joint distribution needs first < second");
    }
    if ((p_.array() < 0.0).any() || (p_.array() > 1.0 + 1e-12).any()) {
        throw InvariantViolation("joint probability outside [0, 1]");
    }
    if (std::abs(p_.sum() - 1.0) > 1e-9) {
        throw InvariantViolation("joint distribution does not sum to 1 within 1e-9");
    }
}

std::vector<double> JointDistribution::marginal_first() const {
    std::vector<double> out(static_cast<std::size_t>(p_.rows()));
    for (Eigen::Index r = 0; r < p_.rows(); ++r) {
        out[static_cast<std::size_t>(r)] = p_.row(r).sum();
    }
    return out;
}

std::vector<double> JointDistribution::marginal_second() const {
    std::vector<double> out(static_cast<std::size_t>(p_.cols()));
    for (Eigen::Index c = 0; c < p_.cols(); ++c) {
        out[static_cast<std::size_t>(c)] = p_.col(c).sum();
    }
    return out;
}

OutcomeDistribution slot_distribution(const ProtocolSpec &spec, int slot) {
    if (slot < 1 || slot > spec.slot_count()) {
        throw InvalidSlots("slot " + std::to_string(slot) + " out of range");
    }
    return outcome_distribution(evolve(spec, spec.initial_state, 1, slot), spec.measurement);
}

JointDistribution joint_distribution(const ProtocolSpec &spec, int i, int j) {
    check_pair(spec, i, j);
    const int m_count = spec.measurement.outcome_count();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m_count, m_count);
    if (spec.mode(i) == SlotMode::Preparation) {
        fill_row(p, spec.preparation_outcome, 1.0, slot_distribution(spec, j));
        return {i, j, std::move(p)};
    }
    const QuantumState at_i = evolve(spec, spec.initial_state, 1, i);
    for (int m = 0; m < m_count; ++m) {
        const BranchResult branch = collapse(at_i, spec.measurement, m);
        if (branch.impossible()) {
            continue;
        }
        const QuantumState at_j = evolve(spec, *branch.state, i, j);
        fill_row(p, m, branch.probability, outcome_distribution(at_j, spec.measurement));
    }
    return {i, j, std::move(p)};
}

JointDistribution joint_via_blocking(const ProtocolSpec &spec, int i, int j) {
    check_pair(spec, i, j);
    const int m_count = spec.measurement.outcome_count();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m_count, m_count);
    if (spec.mode(i) == SlotMode::Preparation) {
        fill_row(p, spec.preparation_outcome, 1.0, slot_distribution(spec, j));
        return {i, j, std::move(p)};
    }
    const QuantumState at_i = evolve(spec, spec.initial_state, 1, i);
    for (int open = 0; open < m_count; ++open) {
        const auto pattern = BlockingPattern::open_only(m_count, open);
        const BranchResult passed = negative_measurement(at_i, spec.measurement, pattern);
        if (passed.impossible()) {
            continue;
        }
        const QuantumState at_j = evolve(spec, *passed.state, i, j);
        fill_row(p, open, passed.probability, outcome_distribution(at_j, spec.measurement));
    }
    return {i, j, std::move(p)};
}

double correlator(const JointDistribution &joint, const ValueAssignment &assignment) {
    const auto &qi = assignment.values(joint.first());
    const auto &qj = assignment.values(joint.second());
    if (static_cast<int>(qi.size()) < joint.rows() || static_cast<int>(qj.size()) < joint.cols()) {
        throw MissingAssignment("value assignment does not cover every outcome");
    }
    double sum = 0.0;
    for (int a = 0; a < joint.rows(); ++a) {
        for (int b = 0; b < joint.cols(); ++b) {
            sum += qi[static_cast<std::size_t>(a)] * qj[static_cast<std::size_t>(b)] * joint(a, b);
        }
    }
    return sum;
}

std::vector<std::pair<int, int>> combination_terms(Combination c) {
    if (c == Combination::K3) {
        return {{2, 1}, {3, 2}, {3, 1}};
    }
    return {{2, 1}, {3, 2}, {3, 4}, {4, 1}};
}

double CorrelatorReport::at(int a, int b) const {
    const auto it = correlators.find({a, b});
    if (it == correlators.end()) {
        throw std::out_of_range("report has no correlator C" + std::to_string(a) + std::to_string(b));
    }
    return it->second;
}

double CorrelatorReport::recompute_k() const {
    if (combination == Combination::K3) {
        return at(2, 1) + at(3, 2) - at(3, 1);
    }
    return at(2, 1) + at(3, 2) + at(3, 4) - at(4, 1);
}

CorrelatorReport evaluate(const ProtocolSpec &spec, Combination combination) {
    const int needed = combination == Combination::K3 ? 3 : 4;
    if (spec.slot_count() != needed) {
        throw InvalidSlots("combination needs " + std::to_string(needed) + " time slots");
    }
    CorrelatorReport report;
    report.combination = combination;
    for (const auto &[a, b] : combination_terms(combination)) {
        const int i = std::min(a, b);
        const int j = std::max(a, b);
        report.correlators[{a, b}] = correlator(joint_distribution(spec, i, j), spec.assignment);
    }
    report.k_value = report.recompute_k();
    return report;
}

ProtocolSpec k4_protocol(double theta3, double phi3) {
    const UnitaryMatrix u1 = make_unitary({std::numbers::pi / 2.0, 0.0});
    const UnitaryMatrix u3 = make_unitary({theta3, phi3});
    const UnitaryMatrix u2 = compose(dagger(u3), dagger(u1));
    ValueAssignment q;
    q.set(1, {1.0, 1.0, 1.0}).set_range(2, 4, kCOddLabels);
    return three_level_spec({u1, u2, u3},
                            {SlotMode::Preparation, SlotMode::Blocking, SlotMode::Blocking, SlotMode::Projective},
                            std::move(q));
}

ProtocolSpec k3_protocol(double theta, double phi) {
    const UnitaryMatrix u1 = make_unitary({theta, phi});
    ValueAssignment q;
    q.set(1, {1.0, 1.0, 1.0}).set_range(2, 3, kCOddLabels);
    return three_level_spec({u1, dagger(u1)}, {SlotMode::Preparation, SlotMode::Blocking, SlotMode::Projective},
                            std::move(q));
}

ProtocolSpec k3_witness_protocol(double theta, double phi) {
    const UnitaryMatrix u1 = make_unitary({theta, phi});
    ValueAssignment q;
    q.set(1, {1.0, 1.0, 1.0}).set(2, {1.0, 1.0, 1.0}).set(3, {0.0, 0.0, 1.0});
    return three_level_spec({u1, dagger(u1)}, {SlotMode::Preparation, SlotMode::Blind, SlotMode::Projective},
                            std::move(q));
}

CorrelatorReport k4(double theta3, double phi3) {
    return evaluate(k4_protocol(theta3, phi3), Combination::K4);
}

CorrelatorReport k3(double theta, double phi) {
    return evaluate(k3_protocol(theta, phi), Combination::K3);
}

double closed_form_c21(double theta, double phi) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return s * s - c * c * std::cos(2.0 * phi);
}

double closed_form_c32(double theta, double phi) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double sp = std::sin(phi);
    const double cp = std::cos(phi);
    return std::cos(2.0 * theta) * (s * s + c * c * (std::pow(cp, 4) - std::pow(sp, 4)));
}

double closed_form_k4(double theta3, double phi3) {
    const double c2t = std::cos(2.0 * theta3);
    const double c4p = std::cos(4.0 * phi3);
    return (9.0 + 2.0 * c2t * c4p - 2.0 * c4p - 2.0 * c2t) / 4.0;
}

WitnessReport witness_report(double theta, double phi) {
    const ProtocolSpec spec = k3_witness_protocol(theta, phi);
    WitnessReport r;
    r.p3_no_measurement = slot_distribution(spec, 3)[kC];
    r.p3_with_measurement = joint_distribution(spec, 2, 3).marginal_second()[kC];
    r.value = r.p3_no_measurement - r.p3_with_measurement;
    return r;
}

double witness(double theta, double phi) {
    return witness_report(theta, phi).value;
}

DensityMatrix post_blind_state(double theta, double phi) {
    const ProtocolSpec spec = k3_witness_protocol(theta, phi);
    return dephase(apply(spec.unitaries[0], spec.initial_state), spec.measurement);
}

double witness_via_dephasing(double theta, double phi) {
    const ProtocolSpec spec = k3_witness_protocol(theta, phi);
    const DensityMatrix restored = apply(spec.unitaries[1], post_blind_state(theta, phi));
    const QuantumState unmeasured = apply(spec.unitaries[1], apply(spec.unitaries[0], spec.initial_state));
    return unmeasured.population(kC) - restored.matrix()(kC, kC).real();
}

double k3_witness(double theta, double phi) {
    return 1.0 + witness(theta, phi);
}

CorrelatorReport k3_witness_combination(double theta, double phi) {
    const ProtocolSpec spec = k3_witness_protocol(theta, phi);
    CorrelatorReport report = evaluate(spec, Combination::K3);
    report.witness = witness(theta, phi);
    return report;
}

std::vector<K4Comparison> compare_closed_form_k4(const std::vector<double> &theta3_values,
                                                 const std::vector<double> &phi3_values) {
    std::vector<K4Comparison> rows;
    rows.reserve(theta3_values.size() * phi3_values.size());
    for (double t : theta3_values) {
        for (double p : phi3_values) {
            K4Comparison row{t, p, k4(t, p).k_value, closed_form_k4(t, p), false};
            row.flagged = std::abs(row.simulated - row.closed_form) > 1e-9;
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace lgsim
