#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "phg/directions.hpp"
#include "phg/eval.hpp"
#include "phg/kernels.hpp"
#include "phg/system.hpp"

namespace phg {

struct TrackOptions {
    double tau0 = -20.0;
    double step_init = 0.05;
    double step_min = 1e-8;
    double step_max = 0.5;
    double newton_tol = 1e-10;  // on ||N|| / ||y||
    int newton_max_iters = 4;
    double shrink = 0.5;
    double grow = 2.0;
    int grow_after = 3;
    std::size_t max_steps = 10000;

    /// Uniform steps with every step accepted; with newton_max_iters = 1 this
    /// is one Euler prediction followed by exactly one Newton iteration.
    bool fixed_step_mode = false;
    std::size_t fixed_steps = 100;

    double start_tol = 1e-6;
    bool skip_start_check = false;
    double accept_tol = 1e-8;
    /// Affine coordinates are reported only when |y_h| >= infinity_tol * ||y||.
    double infinity_tol = 1e-10;

    EvalOptions eval;
    DirectionOptions directions;

    /// Throws UsageError when the options are inconsistent.
    void validate() const;
};

enum class PathStatus {
    converged,
    singular_encountered,
    step_underflow,
    max_steps,
    overflowed,
    zero_coordinate,
    unconverged,  // reached tau = 0 but the residual stayed above accept_tol
};

std::string_view to_string(PathStatus status) noexcept;
PathStatus path_status_from_string(std::string_view name);

struct TrackResult {
    PathStatus status = PathStatus::converged;
    std::vector<Complex> y;  // unit norm, homogenizing coordinate last
    double tau = 0.0;
    std::vector<Complex> x;  // affine point; empty when at_infinity
    bool at_infinity = false;
    double residual = 0.0;  // ||H(y, tau)||
    std::size_t steps_taken = 0;
    std::size_t newton_iters_total = 0;

    std::vector<Complex> start_y;
    double start_tau = 0.0;
};

struct StepReport {
    /// converged when the step itself succeeded, otherwise the failure kind.
    PathStatus status = PathStatus::converged;
    /// True when the failure happened while evaluating at the current point
    /// (before prediction), i.e. the path itself is bad, not the trial step.
    bool failed_at_start = false;
    int newton_iters = 0;
    double newton_norm = 0.0;  // last ||N|| / ||y||
    bool corrector_converged = false;
};

/// One predictor-corrector step for every point: Euler prediction by dtau[i],
/// then up to newton_max_iters Newton corrections, then ||y|| = 1. Points are
/// updated in place; failed points keep their input coordinates.
std::vector<StepReport> euler_newton_step(PointBatch& batch, const HomotopyTables& tables,
                                          std::span<const double> dtau, const TrackOptions& options,
                                          const Backend& backend);

/// Residuals ||H(y_i, tau_i)|| via the batched evaluator; +inf for points that cannot be evaluated.
std::vector<double> batch_residuals(const PointBatch& batch, const HomotopyTables& tables, const Backend& backend,
                                    const EvalOptions& options = {});

/// Tracks every start point from its tau (< 0) to 0. Throws StartPointInvalid
/// when a start residual exceeds start_tol (unless skip_start_check).
std::vector<TrackResult> track_batch(const PointBatch& start, const HomotopyTables& tables,
                                     const TrackOptions& options, const Backend& backend);

/// Tracks a converged result back to its start tau and returns the chordal
/// distance to the original start point; +inf if the backward track fails.
double retrace_check(const TrackResult& result, const HomotopyTables& tables, const TrackOptions& options,
                     const Backend& backend);

/// sqrt(1 - |<a, b>|^2 / (|a|^2 |b|^2)): distance between the projective points.
double chordal_distance(std::span<const Complex> a, std::span<const Complex> b);

}  // namespace phg
