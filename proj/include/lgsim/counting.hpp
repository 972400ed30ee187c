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
 * Statistical emulation of a photon-counting Leggett-Garg run.
 *
 * Counting noise: every measurement setting (a single-time readout, or one
 * blocking configuration of a two-point run) draws its total from
 * Poisson(total_counts) and splits it multinomially over the detector
 * channels plus a sink for blocked or undetected photons. Detector
 * efficiencies thin each channel before the draw; probabilities are
 * re-estimated from the detected counts after efficiency correction.
 *
 * Angle errors: each evolution stage is factored into two-level Givens
 * rotations; every rotation angle gets Gaussian noise accumulated from the
 * wave plates assigned to that stage.
 */
#pragma once

#include "lgsim/core.hpp"
#include "lgsim/measurement.hpp"
#include "lgsim/protocol.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace lgsim {

struct CountingConfig {
    double total_counts = 28000.0; ///< expected coincidences per setting
    int repeats = 500;
    std::uint64_t seed = 1;

    void validate() const;
};

class EfficiencyModel {
  public:
    /// Throws std::invalid_argument unless every efficiency lies in (0, 1].
    explicit EfficiencyModel(std::vector<double> efficiencies);
    static EfficiencyModel uniform(int channels);

    [[nodiscard]] std::size_t size() const noexcept { return eta_.size(); }
    [[nodiscard]] double operator[](std::size_t channel) const { return eta_[channel]; }

  private:
    std::vector<double> eta_;
};

struct AngleErrorModel {
    int plates_per_unitary = 7;
    double sigma_degrees = 0.1;
    /// A half-wave plate turned by x rotates polarization by 2x.
    double doubling = 2.0;

    void validate() const;
};

struct MonteCarloSummary {
    double mean = 0.0;
    double std = 0.0; ///< sample standard deviation (n - 1)
    int samples = 0;
};

/// Welford accumulation; order of pushes does not matter beyond rounding.
class RunningStats {
  public:
    void push(double x);
    [[nodiscard]] MonteCarloSummary summary() const;

  private:
    int n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

using Counts = std::vector<std::int64_t>;

/// Poisson total split multinomially by `dist`. The stream is a pure
/// function of (config.seed, repeat, setting_index).
Counts sample_counts(const OutcomeDistribution &dist, const CountingConfig &config,
                     std::uint64_t setting_index = 0, std::uint64_t repeat = 0);

/// p(n) = (c_n / eta_n) / sum_m (c_m / eta_m). Throws std::invalid_argument
/// when every count is zero or the sizes disagree.
OutcomeDistribution efficiency_correct(std::span<const std::int64_t> counts, const EfficiencyModel &eff);

enum class ProtocolKind { K3, K4 };

/// A parameter point of one of the two fixed three-level protocols.
struct ProtocolPoint {
    ProtocolKind kind = ProtocolKind::K4;
    double theta = 0.0;
    double phi = 0.0;

    [[nodiscard]] ProtocolSpec spec() const;
    [[nodiscard]] Combination combination() const;
};

/// K and its correlators re-estimated from one simulated set of counts.
/// `eff` applies to the detector channels at the later slot of each run.
CorrelatorReport sample_report(const ProtocolSpec &spec, Combination combination, const CountingConfig &config,
                               std::uint64_t repeat, const EfficiencyModel &eff);

MonteCarloSummary k_with_counting_noise(const ProtocolSpec &spec, Combination combination,
                                        const CountingConfig &config,
                                        const std::optional<EfficiencyModel> &eff = std::nullopt);
MonteCarloSummary k_with_counting_noise(const ProtocolPoint &point, const CountingConfig &config,
                                        const std::optional<EfficiencyModel> &eff = std::nullopt);

/// Two-level rotation acting on rows (p, q):
///   [ cos(a) e^{-i x}    sin(a) e^{-i y} ]
///   [ -sin(a) e^{i y}    cos(a) e^{i x}  ]
struct GivensRotation {
    int p = 0;
    int q = 1;
    double angle = 0.0;
    double phase_p = 0.0;
    double phase_q = 0.0;
};

/// G_k ... G_1 U = diag(d). Rotations are ordered (0,1), (0,2), ...,
/// (1,2), ... by the column they clear.
struct GivensDecomposition {
    int dim = 0;
    std::vector<GivensRotation> rotations;
    ComplexVector diagonal;
};

GivensDecomposition givens_decompose(const UnitaryMatrix &u);
/// U = G_1^dag ... G_k^dag diag(d).
UnitaryMatrix givens_compose(const GivensDecomposition &d);

struct AngleErrorSummary {
    MonteCarloSummary k;
    /// C41 for K4, C31 for K3: the correlator whose ideal value is -1.
    MonteCarloSummary closing_correlator;
};

AngleErrorSummary k_with_angle_errors(const ProtocolSpec &spec, Combination combination,
                                      const AngleErrorModel &model, int repeats, std::uint64_t seed);
AngleErrorSummary k_with_angle_errors(const ProtocolPoint &point, const AngleErrorModel &model, int repeats,
                                      std::uint64_t seed);

} // namespace lgsim
