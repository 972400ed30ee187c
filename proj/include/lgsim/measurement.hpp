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

/**
 * @file
 * Projective measurements on N-level states: Born statistics, Lueders
 * collapse, blind (dephasing) measurement, and ideal negative measurement
 * by blocking all channels but one.
 */
#pragma once

#include "lgsim/core.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lgsim {

/// Populations with magnitude below this are treated as exactly zero.
inline constexpr double kProbabilityFloor = 1e-12;

class MissingAssignment : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// "A", "B", "C", ... for outcome indices 0, 1, 2, ...
std::string default_label(int outcome);

/// M orthogonal projectors summing to the identity, each with a label.
class MeasurementModel {
  public:
    MeasurementModel(std::vector<ComplexMatrix> projectors, std::vector<std::string> labels);

    /// Rank-1 projectors onto |0>, ..., |dim-1> labelled A, B, C, ...
    static MeasurementModel computational_basis(int dim);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int outcome_count() const noexcept { return static_cast<int>(projectors_.size()); }
    [[nodiscard]] const ComplexMatrix &projector(int outcome) const { return projectors_.at(outcome); }
    [[nodiscard]] const std::string &label(int outcome) const { return labels_.at(outcome); }
    [[nodiscard]] int index_of(std::string_view label) const;
    /// True when projector m is |m><m| for every m.
    [[nodiscard]] bool is_computational_basis() const noexcept { return basis_; }

  private:
    int dim_ = 0;
    std::vector<ComplexMatrix> projectors_;
    std::vector<std::string> labels_;
    bool basis_ = false;
};

/// q(m, t): the value attached to outcome m at (1-based) time slot t.
/// Values are normally +1/-1; the witness inequality uses 0/1 indicators.
class ValueAssignment {
  public:
    ValueAssignment &set(int slot, std::vector<double> values);
    /// Same labeling at every slot in [first, last].
    ValueAssignment &set_range(int first, int last, const std::vector<double> &values);

    [[nodiscard]] bool covers(int slot) const { return by_slot_.contains(slot); }
    [[nodiscard]] const std::vector<double> &values(int slot) const;
    [[nodiscard]] double value(int slot, int outcome) const;
    [[nodiscard]] const std::map<int, std::vector<double>> &slots() const noexcept { return by_slot_; }

  private:
    std::map<int, std::vector<double>> by_slot_;
};

class OutcomeDistribution {
  public:
    /// Throws InvariantViolation unless every entry lies in [0, 1] and the
    /// total is 1 within 1e-9.
    explicit OutcomeDistribution(std::vector<double> probabilities);

    [[nodiscard]] std::size_t size() const noexcept { return p_.size(); }
    [[nodiscard]] double operator[](std::size_t outcome) const { return p_[outcome]; }
    [[nodiscard]] std::span<const double> probabilities() const noexcept { return p_; }

  private:
    std::vector<double> p_;
};

/// Channels occluded at one time slot. At least one channel stays open.
class BlockingPattern {
  public:
    BlockingPattern(int outcome_count, const std::vector<int> &blocked);
    static BlockingPattern open_only(int outcome_count, int open);

    [[nodiscard]] int outcome_count() const noexcept { return static_cast<int>(blocked_.size()); }
    [[nodiscard]] bool is_blocked(int outcome) const { return blocked_.at(outcome); }
    [[nodiscard]] std::vector<int> open_channels() const;

  private:
    std::vector<bool> blocked_;
};

/// One branch of a measurement. `state` is empty for a zero-probability
/// ("impossible") branch, whose weight is exactly 0.
struct BranchResult {
    double probability = 0.0;
    std::optional<QuantumState> state;

    [[nodiscard]] bool impossible() const noexcept { return !state.has_value(); }
};

OutcomeDistribution outcome_distribution(const QuantumState &state, const MeasurementModel &meas);

/// Lueders rule: (Tr(P rho), P rho P / Tr(P rho)).
BranchResult collapse(const QuantumState &state, const MeasurementModel &meas, int outcome);
BranchResult collapse(const QuantumState &state, const MeasurementModel &meas, std::string_view label);

/// Blind measurement: sum_m P_m rho P_m.
DensityMatrix dephase(const QuantumState &state, const MeasurementModel &meas);

/// Ideal negative measurement: block every channel except one and
/// post-select on the photon passing. Requires exactly one open channel.
BranchResult negative_measurement(const QuantumState &state, const MeasurementModel &meas,
                                  const BlockingPattern &pattern);

} // namespace lgsim
