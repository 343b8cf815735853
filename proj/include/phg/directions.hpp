#pragma once

#include <span>
#include <vector>

#include "phg/complex_matrix.hpp"
#include "phg/kernels.hpp"

namespace phg {

/// N x (N+2): the homogeneous extended Jacobian block [dH/dy | dH/dtau | H]
/// stacked on the row [conj(y), 0, 0].
struct BorderedJacobian {
    ComplexMatrix j;
};

struct DirectionPair {
    std::vector<Complex> euler;   // solves dH/dy E + dH/dtau = 0, y* E = 0
    std::vector<Complex> newton;  // solves dH/dy N + H = 0,       y* N = 0
    double residual_euler = 0.0;
    double residual_newton = 0.0;
    double cond_signal = 0.0;     // smallest |R_ii| (unified) or |pivot| (direct)
};

BorderedJacobian assemble_bordered(const ComplexMatrix& jac_block, std::span<const Complex> y);

enum class DirectionStatus { ok, singular_jacobian, degenerate_tangent };

struct DirectionOutcome {
    DirectionPair pair;
    DirectionStatus status = DirectionStatus::ok;

    bool ok() const noexcept { return status == DirectionStatus::ok; }
};

struct DirectionOptions {
    /// Passed to batched_qr; negative selects the backend default 1e-12 * (N+2).
    double rank_tol = -1.0;
    /// Minimum |det| of the trailing 2x2 block of the null-space basis.
    double det_tol = 1e-12;
    std::size_t workers = 1;
};

/// One QR of J^T per element; the conjugated last two columns of Q span the
/// null space of J and are reduced to [E, 1, 0] and [N, 0, 1].
std::vector<DirectionOutcome> euler_newton_unified_checked(std::span<const BorderedJacobian> batch,
                                                           const Backend& backend, const DirectionOptions& options = {});

/// Throwing variant: SingularJacobian / DegenerateTangent carry the element index.
std::vector<DirectionPair> euler_newton_unified(std::span<const BorderedJacobian> batch, const Backend& backend,
                                                const DirectionOptions& options = {});

/// Oracle path: two bordered N x N solves with partial pivoting.
DirectionPair euler_newton_direct(const ComplexMatrix& jac_block, std::span<const Complex> y);

struct AffineDirections {
    std::vector<Complex> euler;
    std::vector<Complex> newton;
};

/// Affine-chart directions from an n x (n+2) block [dH/dx | dH/dtau | H].
AffineDirections affine_directions(const ComplexMatrix& aff_block, std::span<const Complex> x);

/// Dense solve with partial pivoting; throws SingularJacobian(0) on a vanishing pivot.
std::vector<Complex> solve_dense(ComplexMatrix a, std::vector<Complex> b);

}  // namespace phg
