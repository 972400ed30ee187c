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
 * Leggett-Garg protocols built from two-point runs.
 *
 * Each correlator C_ij is computed from a run in which only slots i and j
 * are measured; every other slot just evolves. Slot 1 may instead be a
 * deterministic preparation (Q(t1) = +1), in which case the initial state
 * must be the basis state of the prepared outcome.
 *
 *   K3  = C21 + C32 - C31
 *   K4  = C21 + C32 + C34 - C41
 *   W   = P3(C) without a t2 measurement - sum_m2 P32(C, m2)
 *   K3W = 1 + W
 */
#pragma once

#include "lgsim/core.hpp"
#include "lgsim/measurement.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace lgsim {

class InvalidSlots : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class SlotMode {
    Preparation, ///< slot 1 only: deterministic prepared outcome, no projector
    Projective,
    Blind,       ///< measured, every outcome carries the same value
    Blocking,    ///< measured by ideal negative measurement (one open channel per run)
    None,        ///< never measured
};

/// Time slots are numbered from 1; unitaries[k] evolves slot k+1 to slot k+2.
struct ProtocolSpec {
    QuantumState initial_state;
    std::vector<UnitaryMatrix> unitaries;
    std::vector<SlotMode> slots;
    MeasurementModel measurement;
    ValueAssignment assignment;
    /// Outcome index fixed at slot 1 when slots[0] == Preparation.
    int preparation_outcome = -1;

    [[nodiscard]] int dim() const { return initial_state.dim(); }
    [[nodiscard]] int slot_count() const noexcept { return static_cast<int>(slots.size()); }
    [[nodiscard]] SlotMode mode(int slot) const { return slots.at(static_cast<std::size_t>(slot - 1)); }

    /// Throws InvalidSlots / DimensionMismatch / InvariantViolation.
    void validate() const;
};

/// P_ij(m_i, m_j) for one ordered pair of slots, i < j.
class JointDistribution {
  public:
    JointDistribution(int first, int second, Eigen::MatrixXd probabilities);

    [[nodiscard]] int first() const noexcept { return first_; }
    [[nodiscard]] int second() const noexcept { return second_; }
    [[nodiscard]] int rows() const noexcept { return static_cast<int>(p_.rows()); }
    [[nodiscard]] int cols() const noexcept { return static_cast<int>(p_.cols()); }
    [[nodiscard]] double operator()(int mi, int mj) const { return p_(mi, mj); }
    [[nodiscard]] const Eigen::MatrixXd &matrix() const noexcept { return p_; }
    [[nodiscard]] double total() const { return p_.sum(); }
    [[nodiscard]] std::vector<double> marginal_first() const;
    [[nodiscard]] std::vector<double> marginal_second() const;

  private:
    int first_;
    int second_;
    Eigen::MatrixXd p_;
};

/// Born distribution at `slot` when no earlier slot (other than a
/// preparation) is measured.
OutcomeDistribution slot_distribution(const ProtocolSpec &spec, int slot);

/// Exact two-point joint distribution: evolve to t_i, collapse on m_i,
/// evolve to t_j, read the Born probability of m_j.
JointDistribution joint_distribution(const ProtocolSpec &spec, int i, int j);

/// The same distribution assembled from one run per open channel at t_i,
/// all other channels blocked.
JointDistribution joint_via_blocking(const ProtocolSpec &spec, int i, int j);

/// sum q(m_i, t_i) q(m_j, t_j) P_ij(m_i, m_j). Throws MissingAssignment.
double correlator(const JointDistribution &joint, const ValueAssignment &assignment);

enum class Combination { K3, K4 };

/// Correlators keyed as written in the combination: C21 -> {2, 1},
/// C34 -> {3, 4}.
struct CorrelatorReport {
    Combination combination = Combination::K3;
    std::map<std::pair<int, int>, double> correlators;
    double k_value = 0.0;
    std::optional<double> witness;

    [[nodiscard]] double at(int a, int b) const;
    /// K recomputed from the stored correlators.
    [[nodiscard]] double recompute_k() const;
};

/// Slot pairs entering a combination, in the order they are written.
std::vector<std::pair<int, int>> combination_terms(Combination c);

/// Evaluate K3 or K4 for an arbitrary protocol with exact probabilities.
CorrelatorReport evaluate(const ProtocolSpec &spec, Combination combination);

/// Four-time protocol: prep |C>, U1 = R(pi/2, 0), U3 = R(theta3, phi3),
/// U2 = U3^dag U1^dag, q(A) = q(B) = +1, q(C) = -1 at slots 2..4.
ProtocolSpec k4_protocol(double theta3, double phi3);

/// Three-time protocol: prep |C>, U1 = R(theta, phi), U2 = U1^dag, same labels.
ProtocolSpec k3_protocol(double theta, double phi);

/// Three-time geometry with a blind t2 measurement (q = 1) and the
/// indicator q(m3) = delta(m3, C) at t3.
ProtocolSpec k3_witness_protocol(double theta, double phi);

CorrelatorReport k4(double theta3, double phi3);
CorrelatorReport k3(double theta, double phi);

/// Printed closed forms, used as cross-checks only.
double closed_form_c21(double theta, double phi);
double closed_form_c32(double theta, double phi);
/// [9 + 2 cos2t cos4p - 2 cos4p - 2 cos2t] / 4, evaluated verbatim. It
/// does not match the simulated K4 (15/4 vs 3 at t = pi/2, p = pi/4); the
/// simulation is authoritative.
double closed_form_k4(double theta3, double phi3);

struct WitnessReport {
    double p3_no_measurement = 0.0;
    double p3_with_measurement = 0.0;
    double value = 0.0;
};

WitnessReport witness_report(double theta, double phi);
double witness(double theta, double phi);
/// Same witness through the dephasing channel:
/// 1 - <C| U2 dephase(U1 rho U1^dag) U2^dag |C>.
double witness_via_dephasing(double theta, double phi);
/// State right after the blind t2 measurement.
DensityMatrix post_blind_state(double theta, double phi);

/// 1 + W, as the witness inequality is written.
double k3_witness(double theta, double phi);
/// The K3 combination evaluated directly under the blind/indicator
/// assignment. Its distance from 1 equals |W|.
CorrelatorReport k3_witness_combination(double theta, double phi);

/// One point of the simulated-vs-printed K4 comparison.
struct K4Comparison {
    double theta3 = 0.0;
    double phi3 = 0.0;
    double simulated = 0.0;
    double closed_form = 0.0;
    bool flagged = false; ///< |simulated - closed_form| > 1e-9
};

std::vector<K4Comparison> compare_closed_form_k4(const std::vector<double> &theta3_values,
                                                 const std::vector<double> &phi3_values);

} // namespace lgsim
