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

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lgsim {

namespace {

void require_dims(const QuantumState &state, const MeasurementModel &meas) {
    if (state.dim() != meas.dim()) {
        throw DimensionMismatch("measurement dimension " + std::to_string(meas.dim()) +
                                " does not match state dimension " + std::to_string(state.dim()));
    }
}

double raw_probability(const QuantumState &state, const MeasurementModel &meas, int m) {
    if (meas.is_computational_basis()) {
        return state.population(m);
    }
    const ComplexMatrix &proj = meas.projector(m);
    if (state.is_pure()) {
        const auto &psi = state.pure().amplitudes();
        return psi.dot(proj * psi).real();
    }
    return (proj * state.mixed().matrix()).trace().real();
}

} // namespace

std::string default_label(int outcome) {
    if (outcome < 0) {
        throw std::out_of_range("negative outcome index");
    }
    if (outcome < 26) {
        return std::string(1, static_cast<char>('A' + outcome));
    }
    return "m" + std::to_string(outcome);
}

MeasurementModel::MeasurementModel(std::vector<ComplexMatrix> projectors, std::vector<std::string> labels)
    : projectors_(std::move(projectors)), labels_(std::move(labels)) {
    if (projectors_.empty()) {
        throw InvariantViolation("measurement needs at least one projector");
    }
    if (labels_.size() != projectors_.size()) {
        throw InvariantViolation("one label per projector is required");
    }
    dim_ = static_cast<int>(projectors_.front().rows());
    ComplexMatrix sum = ComplexMatrix::Zero(dim_, dim_);
    basis_ = static_cast<int>(projectors_.size()) == dim_;
    for (std::size_t a = 0; a < projectors_.size(); ++a) {
        const ComplexMatrix &p = projectors_[a];
        if (p.rows() != dim_ || p.cols() != dim_) {
            throw DimensionMismatch("projectors must share one square dimension");
        }
        if ((p * p - p).norm() > kStateTolerance || (p - p.adjoint()).norm() > kStateTolerance) {
            throw InvariantViolation("projector " + labels_[a] + " is not an orthogonal projector");
        }
        for (std::size_t b = a + 1; b < projectors_.size(); ++b) {
            if ((p * projectors_[b]).norm() > kStateTolerance) {
                throw InvariantViolation("projectors " + labels_[a] + " and " + labels_[b] +
                                         " are not orthogonal");
            }
        }
        if (basis_) {
            ComplexMatrix expect = ComplexMatrix::Zero(dim_, dim_);
            expect(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = 1.0;
            basis_ = (p - expect).norm() <= kStateTolerance;
        }
        sum += p;
    }
    if ((sum - ComplexMatrix::Identity(dim_, dim_)).norm() > kStateTolerance) {
        throw InvariantViolation("projectors do not sum to the identity");
    }
    for (std::size_t a = 0; a < labels_.size(); ++a) {
        for (std::size_t b = a + 1; b < labels_.size(); ++b) {
            if (labels_[a] == labels_[b]) {
                throw InvariantViolation("duplicate outcome label " + labels_[a]);
            }
        }
    }
}

MeasurementModel MeasurementModel::computational_basis(int dim) {
    std::vector<ComplexMatrix> projectors;
    std::vector<std::string> labels;
    for (int m = 0; m < dim; ++m) {
        ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
        p(m, m) = 1.0;
        projectors.push_back(std::move(p));
        labels.push_back(default_label(m));
    }
    return {std::move(projectors), std::move(labels)};
}

int MeasurementModel::index_of(std::string_view label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
        throw std::out_of_range("unknown outcome label " + std::string(label));
    }
    return static_cast<int>(it - labels_.begin());
}

ValueAssignment &ValueAssignment::set(int slot, std::vector<double> values) {
    if (slot < 1) {
        throw std::out_of_range("time slots are numbered from 1");
    }
    by_slot_[slot] = std::move(values);
    return *this;
}

ValueAssignment &ValueAssignment::set_range(int first, int last, const std::vector<double> &values) {
    for (int s = first; s <= last; ++s) {
        set(s, values);
    }
    return *this;
}

const std::vector<double> &ValueAssignment::values(int slot) const {
    const auto it = by_slot_.find(slot);
    if (it == by_slot_.end()) {
        throw MissingAssignment("no value assignment for time slot " + std::to_string(slot));
    }
    return it->second;
}

double ValueAssignment::value(int slot, int outcome) const {
    const auto &v = values(slot);
    if (outcome < 0 || outcome >= static_cast<int>(v.size())) {
        throw MissingAssignment("no value for outcome " + std::to_string(outcome) + " at time slot " +
                                std::to_string(slot));
    }
    return v[static_cast<std::size_t>(outcome)];
}

OutcomeDistribution::OutcomeDistribution(std::vector<double> probabilities) : p_(std::move(probabilities)) {
    if (p_.empty()) {
        throw InvariantViolation("empty outcome distribution");
    }
    double total = 0.0;
    for (double p : p_) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InvariantViolation("probability outside [0, 1]");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvariantViolation("probabilities do not sum to 1 within 1e-9");
    }
}

BlockingPattern::BlockingPattern(int outcome_count, const std::vector<int> &blocked)
    : blocked_(static_cast<std::size_t>(outcome_count), false) {
    if (outcome_count < 1) {
        throw std::invalid_argument("blocking pattern needs at least one channel");
    }
    for (int m : blocked) {
        if (m < 0 || m >= outcome_count) {
            throw std::out_of_range("blocked channel index out of range");
        }
        blocked_[static_cast<std::size_t>(m)] = true;
    }
    if (std::all_of(blocked_.begin(), blocked_.end(), [](bool b) { return b; })) {
        throw std::invalid_argument("blocking every channel leaves nothing to detect");
    }
}

BlockingPattern BlockingPattern::open_only(int outcome_count, int open) {
    std::vector<int> blocked;
    for (int m = 0; m < outcome_count; ++m) {
        if (m != open) {
            blocked.push_back(m);
        }
    }
    if (open < 0 || open >= outcome_count) {
        throw std::out_of_range("open channel index out of range");
    }
    return {outcome_count, blocked};
}

std::vector<int> BlockingPattern::open_channels() const {
    std::vector<int> open;
    for (std::size_t m = 0; m < blocked_.size(); ++m) {
        if (!blocked_[m]) {
            open.push_back(static_cast<int>(m));
        }
    }
    return open;
}

OutcomeDistribution outcome_distribution(const QuantumState &state, const MeasurementModel &meas) {
    require_dims(state, meas);
    std::vector<double> p(static_cast<std::size_t>(meas.outcome_count()));
    for (int m = 0; m < meas.outcome_count(); ++m) {
        const double raw = raw_probability(state, meas, m);
        p[static_cast<std::size_t>(m)] = (raw < kProbabilityFloor) ? 0.0 : raw;
    }
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (double &x : p) {
        x = std::min(1.0, x / total);
    }
    return OutcomeDistribution(std::move(p));
}

BranchResult collapse(const QuantumState &state, const MeasurementModel &meas, int outcome) {
    require_dims(state, meas);
    if (outcome < 0 || outcome >= meas.outcome_count()) {
        throw std::out_of_range("outcome index out of range");
    }
    const double prob = outcome_distribution(state, meas)[static_cast<std::size_t>(outcome)];
    if (prob == 0.0) {
        return {0.0, std::nullopt};
    }
    if (state.is_pure()) {
        const auto &psi = state.pure().amplitudes();
        ComplexVector projected;
        if (meas.is_computational_basis()) {
            projected = ComplexVector::Zero(psi.size());
            projected(outcome) = psi(outcome);
        } else {
            projected = meas.projector(outcome) * psi;
        }
        projected /= projected.norm();
        return {prob, QuantumState(PureState(std::move(projected), Trusted{}))};
    }
    const ComplexMatrix &proj = meas.projector(outcome);
    ComplexMatrix post = proj * state.mixed().matrix() * proj;
    post /= post.trace().real();
    return {prob, QuantumState(DensityMatrix(std::move(post), Trusted{}))};
}

BranchResult collapse(const QuantumState &state, const MeasurementModel &meas, std::string_view label) {
    return collapse(state, meas, meas.index_of(label));
}

DensityMatrix dephase(const QuantumState &state, const MeasurementModel &meas) {
    require_dims(state, meas);
    const DensityMatrix rho = state.to_density();
    if (meas.is_computational_basis()) {
        ComplexMatrix diag = rho.matrix().diagonal().asDiagonal();
        return {std::move(diag), Trusted{}};
    }
    ComplexMatrix out = ComplexMatrix::Zero(meas.dim(), meas.dim());
    for (int m = 0; m < meas.outcome_count(); ++m) {
        const ComplexMatrix &p = meas.projector(m);
        out += p * rho.matrix() * p;
    }
    return {std::move(out), Trusted{}};
}

BranchResult negative_measurement(const QuantumState &state, const MeasurementModel &meas,
                                  const BlockingPattern &pattern) {
    if (pattern.outcome_count() != meas.outcome_count()) {
        throw DimensionMismatch("blocking pattern and measurement have different channel counts");
    }
    const auto open = pattern.open_channels();
    if (open.size() != 1) {
        throw std::invalid_argument("ideal negative measurement needs exactly one open channel");
    }
    return collapse(state, meas, open.front());
}

} // namespace lgsim
