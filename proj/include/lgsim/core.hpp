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
 * Dense complex linear algebra for small N-level systems: validated
 * unitaries, pure states and density matrices, plus the three-level
 * rotation family used by the Leggett-Garg protocols.
 *
 * Basis convention for N = 3: |A> = (1,0,0), |B> = (0,1,0), |C> = (0,0,1).
 */
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lgsim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Frobenius tolerance for unitarity, Hermiticity and unit trace/norm.
inline constexpr double kStateTolerance = 1e-10;

/// Largest supported dimension (dense storage only).
inline constexpr int kMaxDim = 16;

class DimensionMismatch : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class InvariantViolation : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Tag for constructors that skip invariant checks. The caller guarantees
/// the invariant holds (e.g. the value came out of a unitary evolution).
struct Trusted {};

class UnitaryMatrix {
  public:
    /// Throws InvariantViolation unless square, finite and unitary to 1e-10.
    explicit UnitaryMatrix(ComplexMatrix m);
    UnitaryMatrix(ComplexMatrix m, Trusted) noexcept : m_(std::move(m)) {}

    static UnitaryMatrix identity(int dim);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(m_.rows()); }
    [[nodiscard]] const ComplexMatrix &matrix() const noexcept { return m_; }
    [[nodiscard]] Complex operator()(int row, int col) const { return m_(row, col); }

  private:
    ComplexMatrix m_;
};

/// Rotation angles of the three-level family, in radians.
struct EvolutionParams {
    double theta = 0.0;
    double phi = 0.0;

    /// Both angles wrapped into [0, 2*pi).
    [[nodiscard]] EvolutionParams normalized() const;
};

class PureState {
  public:
    /// Throws InvariantViolation unless the amplitudes are finite with unit norm.
    explicit PureState(ComplexVector amplitudes);
    PureState(ComplexVector amplitudes, Trusted) noexcept : psi_(std::move(amplitudes)) {}

    static PureState basis(int dim, int index);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(psi_.size()); }
    [[nodiscard]] const ComplexVector &amplitudes() const noexcept { return psi_; }

  private:
    ComplexVector psi_;
};

class DensityMatrix {
  public:
    /// Throws InvariantViolation unless Hermitian, unit trace and PSD
    /// (smallest eigenvalue >= -1e-10).
    explicit DensityMatrix(ComplexMatrix rho);
    DensityMatrix(ComplexMatrix rho, Trusted) noexcept : rho_(std::move(rho)) {}

    static DensityMatrix from_pure(const PureState &psi);
    static DensityMatrix maximally_mixed(int dim);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(rho_.rows()); }
    [[nodiscard]] const ComplexMatrix &matrix() const noexcept { return rho_; }

  private:
    ComplexMatrix rho_;
};

/// Either a state vector or a density matrix of an N-level system.
class QuantumState {
  public:
    QuantumState(PureState psi) : repr_(std::move(psi)) {}      // NOLINT: implicit by intent
    QuantumState(DensityMatrix rho) : repr_(std::move(rho)) {}  // NOLINT

    [[nodiscard]] int dim() const;
    [[nodiscard]] bool is_pure() const noexcept { return std::holds_alternative<PureState>(repr_); }
    [[nodiscard]] const PureState &pure() const { return std::get<PureState>(repr_); }
    [[nodiscard]] const DensityMatrix &mixed() const { return std::get<DensityMatrix>(repr_); }
    [[nodiscard]] DensityMatrix to_density() const;
    /// <m|rho|m> for a computational basis index.
    [[nodiscard]] double population(int index) const;

  private:
    std::variant<PureState, DensityMatrix> repr_;
};

/// The real orthogonal three-level rotation
///   row 1 = ( cos t,         0,      sin t       )
///   row 2 = ( sin t sin p,   cos p, -cos t sin p )
///   row 3 = (-sin t cos p,   sin p,  cos t cos p )
UnitaryMatrix make_unitary(const EvolutionParams &params);

/// Matrix product a * b.
UnitaryMatrix compose(const UnitaryMatrix &a, const UnitaryMatrix &b);
UnitaryMatrix dagger(const UnitaryMatrix &u);

PureState apply(const UnitaryMatrix &u, const PureState &psi);
DensityMatrix apply(const UnitaryMatrix &u, const DensityMatrix &rho);
QuantumState apply(const UnitaryMatrix &u, const QuantumState &state);

/// Haar-random unitary, deterministic in (dim, seed). QR of a complex
/// Gaussian matrix with the phases of diag(R) folded back into Q.
UnitaryMatrix random_unitary(int dim, std::uint64_t seed);

/// Number of real generator parameters for a dim x dim unitary (dim^2).
constexpr int generator_param_count(int dim) { return dim * dim; }

/// U = exp(iH), H Hermitian. Layout: dim diagonal entries, then
/// (re, im) of H(r, c) for r < c in row-major order.
UnitaryMatrix unitary_from_generator(std::span<const double> params, int dim);

/// Inverse of unitary_from_generator up to the branch of the logarithm:
/// exp(i H(result)) == u to working precision.
std::vector<double> generator_from_unitary(const UnitaryMatrix &u);

/// Frobenius norm of U^dagger U - 1.
double unitarity_defect(const ComplexMatrix &m);

} // namespace lgsim
