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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

namespace lgsim {

namespace {

/// Evaluates K for one (space, assignment) pair with a cached measurement.
class Objective {
  public:
    Objective(const SearchSpace &space, const ValueAssignment &assignment)
        : space_(space), assignment_(assignment), meas_(MeasurementModel::computational_basis(space.n_levels)) {}

    [[nodiscard]] ProtocolSpec protocol(std::span<const double> params) const {
        if (static_cast<int>(params.size()) != space_.parameter_count()) {
            throw std::invalid_argument("objective expects " + std::to_string(space_.parameter_count()) +
                                        " parameters, got " + std::to_string(params.size()));
        }
        const int n = space_.n_levels;
        const int block = generator_param_count(n);
        std::vector<UnitaryMatrix> unitaries;
        unitaries.reserve(static_cast<std::size_t>(space_.n_times - 1));
        for (int k = 0; k < space_.n_times - 1; ++k) {
            unitaries.push_back(unitary_from_generator(params.subspan(static_cast<std::size_t>(k * block),
                                                                      static_cast<std::size_t>(block)),
                                                       n));
        }
        std::vector<SlotMode> slots(static_cast<std::size_t>(space_.n_times), SlotMode::Projective);
        if (space_.constrained) {
            slots.front() = SlotMode::Preparation;
            return {PureState::basis(n, n - 1), std::move(unitaries), std::move(slots), meas_, assignment_, n - 1};
        }
        const auto prep = params.subspan(static_cast<std::size_t>((space_.n_times - 1) * block));
        return {preparation_from_params(prep, n), std::move(unitaries), std::move(slots), meas_, assignment_, -1};
    }

    double operator()(std::span<const double> params) const {
        return evaluate(protocol(params), space_.combination()).k_value;
    }

  private:
    const SearchSpace &space_;
    const ValueAssignment &assignment_;
    MeasurementModel meas_;
};

struct TaskResult {
    double k = -std::numeric_limits<double>::infinity();
    std::vector<double> params;
};

TaskResult local_search(const Objective &objective, const SearchSpace &space, std::uint64_t restart,
                        std::uint64_t assignment_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(space.seed), static_cast<std::uint32_t>(space.seed >> 32),
                      static_cast<std::uint32_t>(restart), static_cast<std::uint32_t>(assignment_index)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> start(-std::numbers::pi, std::numbers::pi);
    std::vector<double> x(static_cast<std::size_t>(space.parameter_count()));
    for (double &v : x) {
        v = start(rng);
    }
    const auto minus_k = [&objective](std::span<const double> p) { return -objective(p); };

    NelderMeadOptions options;
    int remaining = space.budget.iterations;
    double best = minus_k(x);
    // Re-seed the simplex around the incumbent until a fresh simplex stops
    // improving or the iteration cap is spent.
    while (remaining > 0) {
        options.max_iterations = remaining;
        NelderMeadResult r = nelder_mead(minus_k, x, options);
        remaining -= std::max(r.iterations, 1);
        const double gain = best - r.value;
        if (r.value <= best) {
            x = std::move(r.x);
            best = r.value;
        }
        if (!r.converged || gain < options.f_tolerance) {
            break;
        }
        options.initial_step = std::max(0.05, options.initial_step * 0.5);
    }
    return {-best, std::move(x)};
}

} // namespace

int SearchSpace::parameter_count() const noexcept {
    const int unitaries = (n_times - 1) * generator_param_count(n_levels);
    return constrained ? unitaries : unitaries + 2 * (n_levels - 1);
}

void SearchSpace::validate() const {
    if (n_levels < 2 || n_levels > kMaxDim) {
        throw std::invalid_argument("n_levels must lie in [2, " + std::to_string(kMaxDim) + "]");
    }
    if (n_times != 3 && n_times != 4) {
        throw std::invalid_argument("n_times must be 3 or 4");
    }
    if (budget.restarts < 1 || budget.iterations < 1) {
        throw std::invalid_argument("budget must allow at least one restart and one iteration");
    }
}

std::vector<Labeling> enumerate_assignments(int outcome_count) {
    if (outcome_count < 2 || outcome_count > 20) {
        throw std::invalid_argument("outcome count must lie in [2, 20]");
    }
    const unsigned full = (1u << outcome_count) - 1u;
    std::vector<Labeling> out;
    for (unsigned bits = 1; bits < full; ++bits) {
        Labeling q(static_cast<std::size_t>(outcome_count));
        for (int m = 0; m < outcome_count; ++m) {
            q[static_cast<std::size_t>(m)] = ((bits >> m) & 1u) ? -1.0 : 1.0;
        }
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<Labeling> labeling_classes(int outcome_count) {
    std::vector<Labeling> out;
    for (const Labeling &q : enumerate_assignments(outcome_count)) {
        if (std::is_sorted(q.begin(), q.end(), std::greater<>())) {
            out.push_back(q);
        }
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

std::vector<ValueAssignment> candidate_assignments(const SearchSpace &space) {
    space.validate();
    const int m = space.n_outcomes();
    const auto classes = labeling_classes(m);
    const int first_free = space.constrained ? 2 : 1;
    const int free_slots = space.n_times - first_free + 1;
    const auto n_classes = static_cast<int>(classes.size());

    std::vector<ValueAssignment> out;
    std::vector<int> pick(static_cast<std::size_t>(free_slots), 0);
    int combos = 1;
    for (int s = 0; s < free_slots; ++s) {
        combos *= n_classes;
    }
    for (int code = 0; code < combos; ++code) {
        int rest = code;
        for (int s = free_slots - 1; s >= 0; --s) {
            pick[static_cast<std::size_t>(s)] = rest % n_classes;
            rest /= n_classes;
        }
        if (!space.constrained) {
            // Flipping every slot maps class c to class (n_classes - 1 - c).
            std::vector<int> flipped(pick.size());
            std::transform(pick.begin(), pick.end(), flipped.begin(), [&](int c) { return n_classes - 1 - c; });
            if (flipped < pick) {
                continue;
            }
        }
        ValueAssignment q;
        if (space.constrained) {
            q.set(1, Labeling(static_cast<std::size_t>(m), 1.0));
        }
        for (int s = 0; s < free_slots; ++s) {
            q.set(first_free + s, classes[static_cast<std::size_t>(pick[static_cast<std::size_t>(s)])]);
        }
        out.push_back(std::move(q));
    }
    return out;
}

PureState preparation_from_params(std::span<const double> params, int dim) {
    if (static_cast<int>(params.size()) != 2 * (dim - 1)) {
        throw std::invalid_argument("preparation needs 2(N-1) parameters");
    }
    ComplexVector psi(dim);
    double carry = 1.0;
    for (int k = 0; k < dim - 1; ++k) {
        psi(k) = carry * std::cos(params[static_cast<std::size_t>(k)]);
        carry *= std::sin(params[static_cast<std::size_t>(k)]);
    }
    psi(dim - 1) = carry;
    for (int k = 1; k < dim; ++k) {
        psi(k) *= std::polar(1.0, params[static_cast<std::size_t>(dim - 1 + k - 1)]);
    }
    psi.normalize();
    return {std::move(psi), Trusted{}};
}

ProtocolSpec build_protocol(const SearchSpace &space, const ValueAssignment &assignment,
                            std::span<const double> params) {
    space.validate();
    ProtocolSpec spec = Objective(space, assignment).protocol(params);
    spec.validate();
    return spec;
}

double objective(const SearchSpace &space, const ValueAssignment &assignment, std::span<const double> params) {
    space.validate();
    return Objective(space, assignment)(params);
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)> &f, std::vector<double> x0,
                             const NelderMeadOptions &options) {
    const std::size_t n = x0.size();
    if (n == 0) {
        return {std::move(x0), f(std::span<const double>{}), 0, true};
    }
    const double nd = static_cast<double>(n);
    const double reflect = 1.0;
    const double expand = 1.0 + 2.0 / nd;
    const double contract = 0.75 - 1.0 / (2.0 * nd);
    const double shrink = 1.0 - 1.0 / nd;

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += options.initial_step;
    }
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        fv[i] = f(simplex[i]);
    }
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);

    const auto along = [&](std::vector<double> &out, double t) {
        const auto &worst = simplex[order[n]];
        for (std::size_t d = 0; d < n; ++d) {
            out[d] = centroid[d] + t * (centroid[d] - worst[d]);
        }
    };

    NelderMeadResult result;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const auto &best = simplex[order[0]];
        double diameter = 0.0;
        for (const auto &v : simplex) {
            for (std::size_t d = 0; d < n; ++d) {
                diameter = std::max(diameter, std::abs(v[d] - best[d]));
            }
        }
        if (fv[order[n]] - fv[order[0]] < options.f_tolerance || diameter < options.x_tolerance) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto &v = simplex[order[i]];
            for (std::size_t d = 0; d < n; ++d) {
                centroid[d] += v[d];
            }
        }
        for (double &c : centroid) {
            c /= nd;
        }

        const std::size_t w = order[n];
        along(xr, reflect);
        const double fr = f(xr);
        if (fr < fv[order[0]]) {
            along(xe, reflect * expand);
            const double fe = f(xe);
            if (fe < fr) {
                simplex[w] = xe;
                fv[w] = fe;
            } else {
                simplex[w] = xr;
                fv[w] = fr;
            }
            continue;
        }
        if (fr < fv[order[n - 1]]) {
            simplex[w] = xr;
            fv[w] = fr;
            continue;
        }
        if (fr < fv[w]) {
            along(xc, reflect * contract);
            const double fc = f(xc);
            if (fc <= fr) {
                simplex[w] = xc;
                fv[w] = fc;
                continue;
            }
        } else {
            along(xc, -contract);
            const double fc = f(xc);
            if (fc < fv[w]) {
                simplex[w] = xc;
                fv[w] = fc;
                continue;
            }
        }
        const std::vector<double> anchor = simplex[order[0]];
        for (std::size_t i = 1; i <= n; ++i) {
            auto &v = simplex[order[i]];
            for (std::size_t d = 0; d < n; ++d) {
                v[d] = anchor[d] + shrink * (v[d] - anchor[d]);
            }
            fv[order[i]] = f(v);
        }
    }
    const auto best_it = std::min_element(fv.begin(), fv.end());
    const auto bi = static_cast<std::size_t>(best_it - fv.begin());
    result.x = simplex[bi];
    result.value = fv[bi];
    result.iterations = it;
    return result;
}

std::optional<KnownTarget> known_target(const SearchSpace &space) {
    const bool k3 = space.n_times == 3;
    if (space.n_levels == 2) {
        return k3 ? KnownTarget{1.5, 1e-4} : KnownTarget{2.0 * std::numbers::sqrt2, 1e-4};
    }
    if (space.n_levels == 3) {
        if (k3) {
            return space.constrained ? KnownTarget{2.0, 1e-4} : KnownTarget{2.1547, 1e-3};
        }
        if (space.constrained) {
            return KnownTarget{3.0, 1e-4};
        }
    }
    return std::nullopt;
}

double algebraic_bound(int n_times) {
    return n_times == 3 ? 3.0 : 4.0;
}

OptimizationResult maximize(const SearchSpace &space) {
    space.validate();
    const auto candidates = candidate_assignments(space);
    const auto restarts = static_cast<std::size_t>(space.budget.restarts);
    const std::size_t task_count = restarts * candidates.size();

    std::vector<Objective> objectives;
    objectives.reserve(candidates.size());
    for (const auto &q : candidates) {
        objectives.emplace_back(space, q);
    }

    // Task t covers restart t / |candidates| and candidate t % |candidates|.
    std::vector<TaskResult> results(task_count);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t t = next++; t < task_count; t = next++) {
            const std::size_t r = t / candidates.size();
            const std::size_t a = t % candidates.size();
            results[t] = local_search(objectives[a], space, r, a);
        }
    };
    const unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(),
                                                   static_cast<unsigned>(task_count)));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &th : pool) {
        th.join();
    }

    OptimizationResult out;
    out.trace.assign(restarts, -std::numeric_limits<double>::infinity());
    std::size_t best_task = 0;
    for (std::size_t t = 0; t < task_count; ++t) {
        const std::size_t r = t / candidates.size();
        out.trace[r] = std::max(out.trace[r], results[t].k);
        if (results[t].k > results[best_task].k) {
            best_task = t;
        }
    }
    const std::size_t best_candidate = best_task % candidates.size();
    out.best_k = results[best_task].k;
    out.parameters = results[best_task].params;
    out.assignment = candidates[best_candidate];
    if (!space.constrained) {
        const int n = space.n_levels;
        const auto prep = std::span<const double>(out.parameters)
                              .subspan(static_cast<std::size_t>((space.n_times - 1) * generator_param_count(n)));
        out.prep_state = preparation_from_params(prep, n);
        out.preparation_note = "optimized pure preparation; slot 1 measured projectively";
    } else {
        out.preparation_note = "prepared |N-1> with Q(t1) = +1";
    }
    if (const auto target = known_target(space)) {
        out.target = target->value;
        out.below_target = out.best_k < target->value - target->tolerance;
    }
    return out;
}

} // namespace lgsim
