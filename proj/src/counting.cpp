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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lgsim {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

Counts draw(std::span<const double> p, double expected_total, std::mt19937_64 &rng) {
    std::poisson_distribution<std::int64_t> poisson(expected_total);
    std::int64_t left = poisson(rng);
    double mass = 1.0;
    Counts out(p.size(), 0);
    std::size_t last = p.size();
    while (last > 0 && p[last - 1] <= 0.0) {
        --last;
    }
    if (last == 0) {
        return out;
    }
    --last;
    // Whatever the binomial splits leave goes to the last populated channel.
    for (std::size_t m = 0; m < last && left > 0; ++m) {
        if (p[m] <= 0.0) {
            continue;
        }
        const double share = std::clamp(p[m] / mass, 0.0, 1.0);
        std::binomial_distribution<std::int64_t> binom(left, share);
        out[m] = binom(rng);
        left -= out[m];
        mass -= p[m];
    }
    out[last] = left;
    return out;
}

/// Per-channel detection probabilities p_m * eta_m followed by one sink
/// entry holding everything not detected.
std::vector<double> detected(std::span<const double> p, const EfficiencyModel &eff) {
    std::vector<double> out(p.size() + 1);
    double seen = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m) {
        out[m] = p[m] * eff[m];
        seen += out[m];
    }
    out.back() = std::max(0.0, 1.0 - seen);
    return out;
}

int closing_slot(Combination c) {
    return c == Combination::K3 ? 3 : 4;
}

} // namespace

void CountingConfig::validate() const {
    if (!(total_counts >= 1.0) || !std::isfinite(total_counts)) {
        throw std::invalid_argument("total_counts must be at least 1");
    }
    if (repeats < 2) {
        throw std::invalid_argument("at least two Monte Carlo repeats are needed");
    }
}

EfficiencyModel::EfficiencyModel(std::vector<double> efficiencies) : eta_(std::move(efficiencies)) {
    if (eta_.empty()) {
        throw std::invalid_argument("efficiency model needs at least one channel");
    }
    for (double e : eta_) {
        if (!(e > 0.0 && e <= 1.0)) {
            throw std::invalid_argument("detector efficiencies must lie in (0, 1]");
        }
    }
}

EfficiencyModel EfficiencyModel::uniform(int channels) {
    return EfficiencyModel(std::vector<double>(static_cast<std::size_t>(channels), 1.0));
}

void AngleErrorModel::validate() const {
    if (plates_per_unitary < 1) {
        throw std::invalid_argument("each evolution stage needs at least one wave plate");
    }
    if (!(sigma_degrees >= 0.0) || !std::isfinite(sigma_degrees) || !std::isfinite(doubling)) {
        throw std::invalid_argument("plate angle sigma must be finite and non-negative");
    }
}

void RunningStats::push(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / n_;
    m2_ += delta * (x - mean_);
}

MonteCarloSummary RunningStats::summary() const {
    MonteCarloSummary s;
    s.samples = n_;
    s.mean = mean_;
    s.std = n_ > 1 ? std::sqrt(std::max(0.0, m2_ / (n_ - 1))) : 0.0;
    return s;
}

Counts sample_counts(const OutcomeDistribution &dist, const CountingConfig &config, std::uint64_t setting_index,
                     std::uint64_t repeat) {
    if (!(config.total_counts >= 1.0)) {
        throw std::invalid_argument("total_counts must be at least 1");
    }
    auto rng = stream(config.seed, repeat, setting_index);
    return draw(dist.probabilities(), config.total_counts, rng);
}

OutcomeDistribution efficiency_correct(std::span<const std::int64_t> counts, const EfficiencyModel &eff) {
    if (counts.size() != eff.size()) {
        throw std::invalid_argument("one efficiency per count channel is required");
    }
    std::vector<double> p(counts.size());
    double total = 0.0;
    for (std::size_t m = 0; m < counts.size(); ++m) {
        if (counts[m] < 0) {
            throw std::invalid_argument("negative count");
        }
        p[m] = static_cast<double>(counts[m]) / eff[m];
        total += p[m];
    }
    if (total <= 0.0) {
        throw std::invalid_argument("no counts recorded; cannot estimate probabilities");
    }
    for (double &x : p) {
        x /= total;
    }
    return OutcomeDistribution(std::move(p));
}

ProtocolSpec ProtocolPoint::spec() const {
    return kind == ProtocolKind::K3 ? k3_protocol(theta, phi) : k4_protocol(theta, phi);
}

Combination ProtocolPoint::combination() const {
    return kind == ProtocolKind::K3 ? Combination::K3 : Combination::K4;
}

CorrelatorReport sample_report(const ProtocolSpec &spec, Combination combination, const CountingConfig &config,
                               std::uint64_t repeat, const EfficiencyModel &eff) {
    const int m_count = spec.measurement.outcome_count();
    if (static_cast<int>(eff.size()) != m_count) {
        throw std::invalid_argument("efficiency model must cover every detector channel");
    }
    CorrelatorReport report;
    report.combination = combination;
    std::uint64_t setting = 0;
    for (const auto &[a, b] : combination_terms(combination)) {
        const int i = std::min(a, b);
        const int j = std::max(a, b);
        Eigen::MatrixXd estimate = Eigen::MatrixXd::Zero(m_count, m_count);
        if (spec.mode(i) == SlotMode::Preparation) {
            auto rng = stream(config.seed, repeat, setting++);
            const OutcomeDistribution exact = slot_distribution(spec, j);
            const Counts c = draw(detected(exact.probabilities(), eff), config.total_counts, rng);
            const OutcomeDistribution est = efficiency_correct(std::span(c).first(eff.size()), eff);
            for (int m = 0; m < m_count; ++m) {
                estimate(spec.preparation_outcome, m) = est[static_cast<std::size_t>(m)];
            }
        } else {
            // One blocking configuration per open channel at t_i; photons
            // stopped by the block or missed by a detector land in the sink.
            const JointDistribution exact = joint_via_blocking(spec, i, j);
            Counts all(static_cast<std::size_t>(m_count * m_count), 0);
            std::vector<double> eta(all.size());
            std::vector<double> run(static_cast<std::size_t>(m_count));
            for (int open = 0; open < m_count; ++open) {
                auto rng = stream(config.seed, repeat, setting++);
                for (int m = 0; m < m_count; ++m) {
                    run[static_cast<std::size_t>(m)] = exact(open, m);
                }
                const Counts c = draw(detected(run, eff), config.total_counts, rng);
                for (int m = 0; m < m_count; ++m) {
                    const auto k = static_cast<std::size_t>(open * m_count + m);
                    all[k] = c[static_cast<std::size_t>(m)];
                    eta[k] = eff[static_cast<std::size_t>(m)];
                }
            }
            const OutcomeDistribution est = efficiency_correct(all, EfficiencyModel(std::move(eta)));
            for (int r = 0; r < m_count; ++r) {
                for (int m = 0; m < m_count; ++m) {
                    estimate(r, m) = est[static_cast<std::size_t>(r * m_count + m)];
                }
            }
        }
        report.correlators[{a, b}] = correlator(JointDistribution(i, j, std::move(estimate)), spec.assignment);
    }
    report.k_value = report.recompute_k();
    return report;
}

MonteCarloSummary k_with_counting_noise(const ProtocolSpec &spec, Combination combination,
                                        const CountingConfig &config, const std::optional<EfficiencyModel> &eff) {
    config.validate();
    const EfficiencyModel model = eff.value_or(EfficiencyModel::uniform(spec.measurement.outcome_count()));
    RunningStats stats;
    for (int r = 0; r < config.repeats; ++r) {
        stats.push(sample_report(spec, combination, config, static_cast<std::uint64_t>(r), model).k_value);
    }
    return stats.summary();
}

MonteCarloSummary k_with_counting_noise(const ProtocolPoint &point, const CountingConfig &config,
                                        const std::optional<EfficiencyModel> &eff) {
    return k_with_counting_noise(point.spec(), point.combination(), config, eff);
}

GivensDecomposition givens_decompose(const UnitaryMatrix &u) {
    const int n = u.dim();
    ComplexMatrix w = u.matrix();
    GivensDecomposition out;
    out.dim = n;
    for (int col = 0; col + 1 < n; ++col) {
        for (int row = col + 1; row < n; ++row) {
            const Complex a = w(col, col);
            const Complex b = w(row, col);
            GivensRotation g;
            g.p = col;
            g.q = row;
            g.angle = std::atan2(std::abs(b), std::abs(a));
            g.phase_p = std::abs(a) > 0.0 ? std::arg(a) : 0.0;
            g.phase_q = std::abs(b) > 0.0 ? std::arg(b) : 0.0;
            const double c = std::cos(g.angle);
            const double s = std::sin(g.angle);
            const Complex g00 = c * std::polar(1.0, -g.phase_p);
            const Complex g01 = s * std::polar(1.0, -g.phase_q);
            const Complex g10 = -s * std::polar(1.0, g.phase_q);
            const Complex g11 = c * std::polar(1.0, g.phase_p);
            const Eigen::RowVectorXcd rp = w.row(col);
            const Eigen::RowVectorXcd rq = w.row(row);
            w.row(col) = g00 * rp + g01 * rq;
            w.row(row) = g10 * rp + g11 * rq;
            w(row, col) = 0.0;
            out.rotations.push_back(g);
        }
    }
    out.diagonal = w.diagonal();
    for (Eigen::Index k = 0; k < out.diagonal.size(); ++k) {
        out.diagonal(k) /= std::abs(out.diagonal(k));
    }
    return out;
}

UnitaryMatrix givens_compose(const GivensDecomposition &d) {
    ComplexMatrix m = d.diagonal.asDiagonal();
    for (auto it = d.rotations.rbegin(); it != d.rotations.rend(); ++it) {
        const double c = std::cos(it->angle);
        const double s = std::sin(it->angle);
        // Apply G^dag on rows (p, q).
        const Complex h00 = c * std::polar(1.0, it->phase_p);
        const Complex h01 = -s * std::polar(1.0, -it->phase_q);
        const Complex h10 = s * std::polar(1.0, it->phase_q);
        const Complex h11 = c * std::polar(1.0, -it->phase_p);
        const Eigen::RowVectorXcd rp = m.row(it->p);
        const Eigen::RowVectorXcd rq = m.row(it->q);
        m.row(it->p) = h00 * rp + h01 * rq;
        m.row(it->q) = h10 * rp + h11 * rq;
    }
    return {std::move(m), Trusted{}};
}

AngleErrorSummary k_with_angle_errors(const ProtocolSpec &spec, Combination combination,
                                      const AngleErrorModel &model, int repeats, std::uint64_t seed) {
    model.validate();
    if (repeats < 2) {
        throw std::invalid_argument("at least two Monte Carlo repeats are needed");
    }
    std::vector<GivensDecomposition> stages;
    for (const auto &u : spec.unitaries) {
        stages.push_back(givens_decompose(u));
    }
    const int closing = closing_slot(combination);

    RunningStats k_stats;
    RunningStats closing_stats;
    ProtocolSpec noisy = spec;
    for (int r = 0; r < repeats; ++r) {
        auto rng = stream(seed, static_cast<std::uint64_t>(r), 0);
        for (std::size_t s = 0; s < stages.size(); ++s) {
            GivensDecomposition perturbed = stages[s];
            const double per_rotation =
                static_cast<double>(model.plates_per_unitary) / static_cast<double>(perturbed.rotations.size());
            const double sigma =
                model.sigma_degrees * model.doubling * std::numbers::pi / 180.0 * std::sqrt(per_rotation);
            std::normal_distribution<double> noise(0.0, sigma);
            for (auto &g : perturbed.rotations) {
                g.angle += sigma > 0.0 ? noise(rng) : 0.0;
            }
            noisy.unitaries[s] = givens_compose(perturbed);
        }
        const CorrelatorReport rep = evaluate(noisy, combination);
        k_stats.push(rep.k_value);
        closing_stats.push(rep.at(closing, 1));
    }
    return {k_stats.summary(), closing_stats.summary()};
}

AngleErrorSummary k_with_angle_errors(const ProtocolPoint &point, const AngleErrorModel &model, int repeats,
                                      std::uint64_t seed) {
    return k_with_angle_errors(point.spec(), point.combination(), model, repeats, seed);
}

} // namespace lgsim
