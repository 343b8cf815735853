#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "phg/complex_matrix.hpp"
#include "phg/kernels.hpp"
#include "phg/system.hpp"

namespace phg {

/// p points in homogeneous coordinates (rows of y) with their path parameters.
/// z holds the principal logarithms of y once to_log_coords has run.
struct PointBatch {
    ComplexMatrix y;          // p x N
    std::vector<double> tau;  // p values, all <= 0
    ComplexMatrix z;          // p x N, valid only when z_valid
    bool z_valid = false;

    std::size_t size() const noexcept { return y.rows(); }
    std::size_t dim() const noexcept { return y.cols(); }
};

/// Validates shapes and tau <= 0; throws ShapeError / UsageError.
PointBatch make_point_batch(ComplexMatrix y, std::vector<double> tau);

enum class Coords { log, homogeneous };

/// Per point an n x (N+2) block [dH/dcoords | dH/dtau | H], stored row-major
/// as one row of `data` (block row k occupies columns k(N+2) .. k(N+2)+N+1).
struct ExtendedJacobianBatch {
    Coords coords = Coords::log;
    std::size_t equations = 0;  // n
    std::size_t variables = 0;  // N
    ComplexMatrix data;         // p x n(N+2)

    std::size_t size() const noexcept { return data.rows(); }
    std::size_t block_cols() const noexcept { return variables + 2; }
    Complex at(std::size_t point, std::size_t eq, std::size_t col) const noexcept {
        return data(point, eq * block_cols() + col);
    }
    /// Copy of the block of one point.
    ComplexMatrix block(std::size_t point) const;
};

PointBatch to_log_coords(PointBatch batch);

/// e^{[Z | tau] A_hat} [B_1^T ... B_n^T]. Requires z_valid.
ExtendedJacobianBatch eval_extended_jacobian_log(const PointBatch& batch, const HomotopyTables& tables,
                                                 const Backend& backend);

/// Scales derivative columns by e^{-z}; tau and value columns are unchanged.
ExtendedJacobianBatch rescale_to_homogeneous(ExtendedJacobianBatch jac, const PointBatch& batch);

/// Direct monomial expansion of the homogenized homotopy and its derivatives at
/// one point, without logarithms or matrix products. Homogeneous coordinates.
ComplexMatrix eval_scalar_oracle(std::span<const Complex> y, double tau, const HomogenizedSystem& sys);

struct EvalOptions {
    /// Sub-batch size; 0 selects ceil(p / 4).
    std::size_t batch_size = 0;
    /// Worker threads used for independent sub-batches.
    std::size_t workers = 1;
};

std::size_t default_batch_size(std::size_t points);

/// Log coordinates, GEMM evaluation and rescaling over ceil(p / b) sub-batches.
/// Errors are rethrown as SubBatchError carrying the sub-batch index; point
/// indices inside them refer to the full batch.
ExtendedJacobianBatch evaluate_batch(const PointBatch& points, const HomotopyTables& tables, const Backend& backend,
                                     const EvalOptions& options = {});

enum class PointStatus { ok, zero_coordinate, overflow };

/// Non-throwing variant: failed points get a status and a zero block; other
/// points are computed exactly as evaluate_batch would.
struct EvalOutcome {
    ExtendedJacobianBatch jac;
    std::vector<PointStatus> status;
};

EvalOutcome evaluate_batch_checked(const PointBatch& points, const HomotopyTables& tables, const Backend& backend,
                                   const EvalOptions& options = {});

}  // namespace phg
