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

#include "lgsim/core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

namespace lgsim {

namespace {

bool all_finite(const ComplexMatrix &m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const Complex z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            return false;
        }
    }
    return true;
}

void require_dim(int dim) {
    if (dim < 1 || dim > kMaxDim) {
        throw std::invalid_argument("dimension must lie in [1, " + std::to_string(kMaxDim) +
                                    "], got " + std::to_string(dim));
    }
}

void require_same_dim(int a, int b, const char *what) {
    if (a != b) {
        throw DimensionMismatch(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
    }
}

double wrap_angle(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(x, two_pi);
    if (r < 0.0) {
        r += two_pi;
    }
    // fmod of a value just below a multiple of 2pi can round up to 2pi.
    return r >= two_pi ? 0.0 : r;
}

} // namespace

double unitarity_defect(const ComplexMatrix &m) {
    const auto n = m.rows();
    return (m.adjoint() * m - ComplexMatrix::Identity(n, n)).norm();
}

UnitaryMatrix::UnitaryMatrix(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
        throw InvariantViolation("unitary must be square");
    }
    require_dim(static_cast<int>(m_.rows()));
    if (!all_finite(m_)) {
        throw InvariantViolation("unitary has non-finite entries");
    }
    if (unitarity_defect(m_) > kStateTolerance) {
        throw InvariantViolation("matrix is not unitary within 1e-10");
    }
}

UnitaryMatrix UnitaryMatrix::identity(int dim) {
    require_dim(dim);
    return {ComplexMatrix::Identity(dim, dim), Trusted{}};
}

EvolutionParams EvolutionParams::normalized() const {
    if (!std::isfinite(theta) || !std::isfinite(phi)) {
        throw InvariantViolation("evolution angles must be finite");
    }
    return {wrap_angle(theta), wrap_angle(phi)};
}

PureState::PureState(ComplexVector amplitudes) : psi_(std::move(amplitudes)) {
    require_dim(static_cast<int>(psi_.size()));
    if (!all_finite(psi_)) {
        throw InvariantViolation("state has non-finite amplitudes");
    }
    if (std::abs(psi_.norm() - 1.0) > kStateTolerance) {
        throw InvariantViolation("state vector is not normalized within 1e-10");
    }
}

PureState PureState::basis(int dim, int index) {
    require_dim(dim);
    if (index < 0 || index >= dim) {
        throw std::out_of_range("basis index out of range");
    }
    ComplexVector v = ComplexVector::Zero(dim);
    v(index) = 1.0;
    return {std::move(v), Trusted{}};
}

DensityMatrix::DensityMatrix(ComplexMatrix rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols()) {
        throw InvariantViolation("density matrix must be square");
    }
    require_dim(static_cast<int>(rho_.rows()));
    if (!all_finite(rho_)) {
        throw InvariantViolation("density matrix has non-finite entries");
    }
    if ((rho_ - rho_.adjoint()).norm() > kStateTolerance) {
        throw InvariantViolation("density matrix is not Hermitian within 1e-10");
    }
    if (std::abs(rho_.trace() - Complex(1.0)) > kStateTolerance) {
        throw InvariantViolation("density matrix trace differs from 1 by more than 1e-10");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kStateTolerance) {
        throw InvariantViolation("density matrix has an eigenvalue below -1e-10");
    }
}

DensityMatrix DensityMatrix::from_pure(const PureState &psi) {
    const auto &v = psi.amplitudes();
    return {v * v.adjoint(), Trusted{}};
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    require_dim(dim);
    return {ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim), Trusted{}};
}

int QuantumState::dim() const {
    return std::visit([](const auto &s) { return s.dim(); }, repr_);
}

DensityMatrix QuantumState::to_density() const {
    if (is_pure()) {
        return DensityMatrix::from_pure(pure());
    }
    return mixed();
}

double QuantumState::population(int index) const {
    if (is_pure()) {
        return std::norm(pure().amplitudes()(index));
    }
    return mixed().matrix()(index, index).real();
}

UnitaryMatrix make_unitary(const EvolutionParams &params) {
    const double ct = std::cos(params.theta);
    const double st = std::sin(params.theta);
    const double cp = std::cos(params.phi);
    const double sp = std::sin(params.phi);
    ComplexMatrix m(3, 3);
    m << ct, 0.0, st,
         st * sp, cp, -ct * sp,
         -st * cp, sp, ct * cp;
    return {std::move(m), Trusted{}};
}

UnitaryMatrix compose(const UnitaryMatrix &a, const UnitaryMatrix &b) {
    require_same_dim(a.dim(), b.dim(), "compose");
    return {a.matrix() * b.matrix(), Trusted{}};
}

UnitaryMatrix dagger(const UnitaryMatrix &u) {
    return {u.matrix().adjoint(), Trusted{}};
}

PureState apply(const UnitaryMatrix &u, const PureState &psi) {
    require_same_dim(u.dim(), psi.dim(), "apply");
    return {u.matrix() * psi.amplitudes(), Trusted{}};
}

DensityMatrix apply(const UnitaryMatrix &u, const DensityMatrix &rho) {
    require_same_dim(u.dim(), rho.dim(), "apply");
    return {u.matrix() * rho.matrix() * u.matrix().adjoint(), Trusted{}};
}

QuantumState apply(const UnitaryMatrix &u, const QuantumState &state) {
    if (state.is_pure()) {
        return apply(u, state.pure());
    }
    return apply(u, state.mixed());
}

UnitaryMatrix random_unitary(int dim, std::uint64_t seed) {
    require_dim(dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexMatrix z(dim, dim);
    for (int c = 0; c < dim; ++c) {
        for (int r = 0; r < dim; ++r) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            z(r, c) = Complex(re, im);
        }
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(z);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix &r = qr.matrixQR();
    for (int k = 0; k < dim; ++k) {
        const Complex d = r(k, k);
        const double mag = std::abs(d);
        q.col(k) *= mag > 0.0 ? d / mag : Complex(1.0);
    }
    return {std::move(q), Trusted{}};
}

UnitaryMatrix unitary_from_generator(std::span<const double> params, int dim) {
    require_dim(dim);
    if (static_cast<int>(params.size()) != generator_param_count(dim)) {
        throw std::invalid_argument("generator needs " + std::to_string(generator_param_count(dim)) +
                                    " parameters, got " + std::to_string(params.size()));
    }
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    std::size_t k = 0;
    for (int i = 0; i < dim; ++i) {
        h(i, i) = params[k++];
    }
    for (int r = 0; r < dim; ++r) {
        for (int c = r + 1; c < dim; ++c) {
            const Complex z(params[k], params[k + 1]);
            k += 2;
            h(r, c) = z;
            h(c, r) = std::conj(z);
        }
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const auto &vecs = es.eigenvectors();
    ComplexVector phases(dim);
    for (int i = 0; i < dim; ++i) {
        phases(i) = std::polar(1.0, es.eigenvalues()(i));
    }
    return {vecs * phases.asDiagonal() * vecs.adjoint(), Trusted{}};
}

std::vector<double> generator_from_unitary(const UnitaryMatrix &u) {
    const int dim = u.dim();
    // Unitaries are normal, so the Schur factor is diagonal.
    Eigen::ComplexSchur<ComplexMatrix> schur(u.matrix());
    const ComplexMatrix &q = schur.matrixU();
    ComplexVector angles(dim);
    for (int i = 0; i < dim; ++i) {
        angles(i) = std::arg(schur.matrixT()(i, i));
    }
    const ComplexMatrix h = q * angles.asDiagonal() * q.adjoint();
    std::vector<double> params;
    params.reserve(static_cast<std::size_t>(generator_param_count(dim)));
    for (int i = 0; i < dim; ++i) {
        params.push_back(h(i, i).real());
    }
    for (int r = 0; r < dim; ++r) {
        for (int c = r + 1; c < dim; ++c) {
            params.push_back(h(r, c).real());
            params.push_back(h(r, c).imag());
        }
    }
    return params;
}

} // namespace lgsim
