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
 * Numerical maximization of K3 / K4 for N-level systems measured in an
 * M = N outcome basis.
 *
 * Parameter vector layout: one generator block of N^2 reals per inter-time
 * unitary (U = exp(iH)), followed in unconstrained mode by 2(N-1)
 * preparation parameters (N-1 hyperspherical angles, then N-1 relative
 * phases).
 *
 * Constrained mode prepares |N-1> at slot 1 with Q(t1) = +1. Unconstrained
 * mode optimizes a pure preparation and measures slot 1 projectively with
 * its own labeling.
 */
#pragma once

#include "lgsim/core.hpp"
#include "lgsim/measurement.hpp"
#include "lgsim/protocol.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lgsim {

struct Budget {
    int restarts = 64;
    int iterations = 2000;
};

struct SearchSpace {
    int n_levels = 3;
    int n_times = 3;
    bool constrained = true;
    Budget budget;
    std::uint64_t seed = 1;

    [[nodiscard]] int n_outcomes() const noexcept { return n_levels; }
    [[nodiscard]] Combination combination() const noexcept {
        return n_times == 3 ? Combination::K3 : Combination::K4;
    }
    [[nodiscard]] int parameter_count() const noexcept;
    void validate() const;
};

/// A +1/-1 value for each of the M outcomes.
using Labeling = std::vector<double>;

/// Every non-constant +1/-1 labeling of M outcomes (2^M - 2 of them),
/// ordered by the binary pattern with bit m set meaning q(m) = -1.
std::vector<Labeling> enumerate_assignments(int outcome_count);

/// One representative per basis-permutation class: k leading +1 values,
/// then M - k values of -1, for k = M-1 down to 1. General unitaries
/// absorb any relabeling of the measurement basis, so searching these per
/// slot is exhaustive.
std::vector<Labeling> labeling_classes(int outcome_count);

/// Per-slot assignments searched by maximize(). Unconstrained spaces drop
/// one of each pair related by flipping every slot (which leaves every
/// correlator unchanged).
std::vector<ValueAssignment> candidate_assignments(const SearchSpace &space);

PureState preparation_from_params(std::span<const double> params, int dim);

/// Protocol described by a parameter vector.
ProtocolSpec build_protocol(const SearchSpace &space, const ValueAssignment &assignment,
                            std::span<const double> params);

/// K through the protocol evaluator. Throws std::invalid_argument on a
/// parameter vector of the wrong length.
double objective(const SearchSpace &space, const ValueAssignment &assignment, std::span<const double> params);

struct NelderMeadOptions {
    int max_iterations = 2000;
    double initial_step = 0.5;
    double x_tolerance = 1e-8;  ///< simplex diameter
    double f_tolerance = 1e-10; ///< spread of vertex values
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Minimizes f with the adaptive-coefficient simplex method.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)> &f, std::vector<double> x0,
                             const NelderMeadOptions &options);

struct OptimizationResult {
    double best_k = 0.0;
    std::vector<double> parameters;
    ValueAssignment assignment;
    std::optional<PureState> prep_state;
    /// Best K found in each restart (max over candidate assignments).
    std::vector<double> trace;
    std::optional<double> target;
    bool below_target = false;
    std::string preparation_note;
};

/// Reference optimum for the handful of cases with a printed value.
struct KnownTarget {
    double value;
    double tolerance;
};
std::optional<KnownTarget> known_target(const SearchSpace &space);

/// |K| can never exceed this (each correlator lies in [-1, 1]).
double algebraic_bound(int n_times);

/// Multi-start simplex search over every candidate assignment. Restarts
/// run on a worker pool; each owns an RNG seeded from (seed, restart,
/// assignment index). The merge is a max with ties broken by restart, then
/// assignment index, so the result does not depend on scheduling.
OptimizationResult maximize(const SearchSpace &space);

} // namespace lgsim
