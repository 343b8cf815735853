#include "phg/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void normalize_row(std::span<Complex> row) {
    const double s = norm2(row);
    if (s > 0.0 && std::isfinite(s))
        for (auto& v : row) v /= s;
}

PathStatus status_of(PointStatus s) {
    return s == PointStatus::zero_coordinate ? PathStatus::zero_coordinate : PathStatus::overflowed;
}

PointBatch gather(const PointBatch& batch, std::span<const std::size_t> rows) {
    PointBatch out;
    out.y = ComplexMatrix(rows.size(), batch.dim());
    out.tau.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy(batch.y.row(rows[r]).begin(), batch.y.row(rows[r]).end(), out.y.row(r).begin());
        out.tau[r] = batch.tau[rows[r]];
    }
    return out;
}

struct DirectionsAt {
    std::vector<DirectionOutcome> directions;  // indexed like the gathered rows
    std::vector<PointStatus> eval_status;
};

// Evaluates and computes both directions at the given rows of `batch`.
DirectionsAt directions_at(const PointBatch& batch, std::span<const std::size_t> rows, const HomotopyTables& tables,
                           const TrackOptions& options, const Backend& backend) {
    const PointBatch sub = gather(batch, rows);
    EvalOutcome ev = evaluate_batch_checked(sub, tables, backend, options.eval);

    std::vector<BorderedJacobian> bordered;
    std::vector<std::size_t> owner;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (ev.status[r] != PointStatus::ok) continue;
        bordered.push_back(assemble_bordered(ev.jac.block(r), sub.y.row(r)));
        owner.push_back(r);
    }
    auto solved = euler_newton_unified_checked(bordered, backend, options.directions);

    DirectionsAt out;
    out.directions.resize(rows.size());
    out.eval_status = std::move(ev.status);
    for (std::size_t e = 0; e < owner.size(); ++e) out.directions[owner[e]] = std::move(solved[e]);
    return out;
}

PathStatus failure_of(const DirectionsAt& d, std::size_t r) {
    if (d.eval_status[r] != PointStatus::ok) return status_of(d.eval_status[r]);
    return d.directions[r].ok() ? PathStatus::converged : PathStatus::singular_encountered;
}

std::vector<double> value_norms(const EvalOutcome& ev, const HomotopyTables& tables) {
    std::vector<double> out(ev.status.size(), kInf);
    const std::size_t bc = tables.block_cols();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (ev.status[i] != PointStatus::ok) continue;
        double s = 0.0;
        for (std::size_t k = 0; k < tables.equation_count; ++k) s += std::norm(ev.jac.data(i, k * bc + bc - 1));
        out[i] = std::sqrt(s);
    }
    return out;
}

// Per-path state of the adaptive loop.
struct PathState {
    double step = 0.0;
    int successes = 0;
    std::size_t attempts = 0;
    bool active = true;
};

void finalize(TrackResult& res, const HomotopyTables& tables, const TrackOptions& options) {
    const std::size_t N = tables.variable_count;
    const double ny = norm2(res.y);
    const Complex yh = res.y[N - 1];
    res.at_infinity = !(std::abs(yh) >= options.infinity_tol * ny);
    res.x.clear();
    if (!res.at_infinity)
        for (std::size_t j = 0; j + 1 < N; ++j) res.x.push_back(res.y[j] / yh);
}

struct SegmentResult {
    ComplexMatrix y;
    std::vector<double> tau;
    std::vector<PathStatus> status;
    std::vector<std::size_t> steps;
    std::vector<std::size_t> newton_iters;
};

// Moves every path from its tau to `target` (direction given by the sign of
// target - tau). Paths are stepped in lockstep but each has its own step size.
SegmentResult track_segment(PointBatch batch, double target, const HomotopyTables& tables,
                            const TrackOptions& options, const Backend& backend) {
    const std::size_t p = batch.size();
    SegmentResult out;
    out.status.assign(p, PathStatus::converged);
    out.steps.assign(p, 0);
    out.newton_iters.assign(p, 0);

    std::vector<PathState> state(p);
    for (std::size_t i = 0; i < p; ++i) {
        normalize_row(batch.y.row(i));
        state[i].step = options.fixed_step_mode
                            ? std::abs(target - batch.tau[i]) / static_cast<double>(options.fixed_steps)
                            : options.step_init;
        state[i].active = batch.tau[i] != target;
    }

    for (;;) {
        std::vector<std::size_t> active;
        for (std::size_t i = 0; i < p; ++i)
            if (state[i].active) active.push_back(i);
        if (active.empty()) break;

        PointBatch sub = gather(batch, active);
        std::vector<double> dtau(active.size());
        std::vector<bool> lands(active.size());
        for (std::size_t r = 0; r < active.size(); ++r) {
            const std::size_t i = active[r];
            const double remaining = target - batch.tau[i];
            const double mag = std::min(state[i].step, std::abs(remaining));
            lands[r] = mag == std::abs(remaining) ||
                       (options.fixed_step_mode && state[i].attempts + 1 >= options.fixed_steps);
            dtau[r] = lands[r] ? remaining : std::copysign(mag, remaining);
        }

        const auto reports = euler_newton_step(sub, tables, dtau, options, backend);

        for (std::size_t r = 0; r < active.size(); ++r) {
            const std::size_t i = active[r];
            auto& st = state[i];
            const auto& rep = reports[r];
            ++st.attempts;
            out.newton_iters[i] += static_cast<std::size_t>(rep.newton_iters);

            const bool step_ok = rep.status == PathStatus::converged &&
                                 (options.fixed_step_mode || rep.corrector_converged);
            if (rep.status != PathStatus::converged && (rep.failed_at_start || options.fixed_step_mode)) {
                out.status[i] = rep.status;
                st.active = false;
                continue;
            }
            if (step_ok) {
                std::copy(sub.y.row(r).begin(), sub.y.row(r).end(), batch.y.row(i).begin());
                batch.tau[i] = lands[r] ? target : batch.tau[i] + dtau[r];
                ++out.steps[i];
                if (batch.tau[i] == target) {
                    st.active = false;
                    continue;
                }
                if (!options.fixed_step_mode && ++st.successes >= options.grow_after) {
                    st.step = std::min(st.step * options.grow, options.step_max);
                    st.successes = 0;
                }
            } else {
                st.successes = 0;
                st.step *= options.shrink;
                if (st.step < options.step_min) {
                    out.status[i] = PathStatus::step_underflow;
                    st.active = false;
                    continue;
                }
            }
            if (st.attempts >= options.max_steps) {
                out.status[i] = PathStatus::max_steps;
                st.active = false;
            }
        }
    }
    out.y = std::move(batch.y);
    out.tau = std::move(batch.tau);
    return out;
}

}  // namespace

void TrackOptions::validate() const {
    if (!(tau0 < 0.0)) throw UsageError("tau0 must be negative");
    if (!(step_min > 0.0 && step_min <= step_init && step_init <= step_max))
        throw UsageError("step sizes must satisfy 0 < step_min <= step_init <= step_max");
    if (newton_max_iters < 0) throw UsageError("newton_max_iters must be nonnegative");
    if (!(shrink > 0.0 && shrink < 1.0) || !(grow >= 1.0)) throw UsageError("invalid step shrink/grow factors");
    if (fixed_step_mode && fixed_steps == 0) throw UsageError("fixed_steps must be positive");
    if (max_steps == 0) throw UsageError("max_steps must be positive");
}

std::string_view to_string(PathStatus status) noexcept {
    switch (status) {
        case PathStatus::converged: return "Converged";
        case PathStatus::singular_encountered: return "SingularEncountered";
        case PathStatus::step_underflow: return "StepUnderflow";
        case PathStatus::max_steps: return "MaxSteps";
        case PathStatus::overflowed: return "Overflowed";
        case PathStatus::zero_coordinate: return "ZeroCoordinate";
        case PathStatus::unconverged: return "Unconverged";
    }
    return "Unknown";
}

PathStatus path_status_from_string(std::string_view name) {
    for (auto s : {PathStatus::converged, PathStatus::singular_encountered, PathStatus::step_underflow,
                   PathStatus::max_steps, PathStatus::overflowed, PathStatus::zero_coordinate,
                   PathStatus::unconverged})
        if (to_string(s) == name) return s;
    throw UsageError("unknown path status '" + std::string(name) + "'");
}

double chordal_distance(std::span<const Complex> a, std::span<const Complex> b) {
    if (a.size() != b.size()) throw ShapeError("chordal_distance: length mismatch");
    const double na = norm2(a), nb = norm2(b);
    if (na == 0.0 || nb == 0.0) return kInf;
    // Length of the component of a/|a| orthogonal to b/|b|.
    Complex ip = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) ip += std::conj(b[j]) * a[j];
    ip /= na * nb;
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] / na - ip * (b[j] / nb));
    return std::sqrt(s);
}

std::vector<StepReport> euler_newton_step(PointBatch& batch, const HomotopyTables& tables,
                                          std::span<const double> dtau, const TrackOptions& options,
                                          const Backend& backend) {
    const std::size_t p = batch.size();
    if (dtau.size() != p) throw ShapeError("euler_newton_step: need one step size per point");
    if (batch.dim() != tables.variable_count) throw ShapeError("euler_newton_step: dimension mismatch");
    for (std::size_t i = 0; i < p; ++i)
        if (!(batch.tau[i] + dtau[i] <= 0.0)) throw UsageError("euler_newton_step: step would leave tau <= 0");

    std::vector<StepReport> reports(p);
    std::vector<std::size_t> live(p);
    for (std::size_t i = 0; i < p; ++i) live[i] = i;
    const ComplexMatrix y_in = batch.y;
    const std::vector<double> tau_in = batch.tau;

    auto fail = [&](std::size_t i, PathStatus s, bool at_start) {
        reports[i].status = s;
        reports[i].failed_at_start = at_start;
        std::copy(y_in.row(i).begin(), y_in.row(i).end(), batch.y.row(i).begin());
        batch.tau[i] = tau_in[i];
    };

    // Prediction.
    {
        const auto d = directions_at(batch, live, tables, options, backend);
        std::vector<std::size_t> next;
        for (std::size_t r = 0; r < live.size(); ++r) {
            const std::size_t i = live[r];
            const PathStatus s = failure_of(d, r);
            if (s != PathStatus::converged) {
                fail(i, s, true);
                continue;
            }
            const auto& e = d.directions[r].pair.euler;
            for (std::size_t j = 0; j < batch.dim(); ++j) batch.y(i, j) += dtau[i] * e[j];
            batch.tau[i] += dtau[i];
            next.push_back(i);
        }
        live = std::move(next);
    }

    // Correction.
    for (int it = 0; it < options.newton_max_iters && !live.empty(); ++it) {
        const auto d = directions_at(batch, live, tables, options, backend);
        std::vector<std::size_t> next;
        for (std::size_t r = 0; r < live.size(); ++r) {
            const std::size_t i = live[r];
            const PathStatus s = failure_of(d, r);
            if (s != PathStatus::converged) {
                fail(i, s, false);
                continue;
            }
            const auto& nv = d.directions[r].pair.newton;
            for (std::size_t j = 0; j < batch.dim(); ++j) batch.y(i, j) += nv[j];
            auto& rep = reports[i];
            ++rep.newton_iters;
            const double ny = norm2(batch.y.row(i));
            rep.newton_norm = norm2(nv) / ny;
            if (rep.newton_norm <= options.newton_tol) {
                rep.corrector_converged = true;
            } else {
                next.push_back(i);
            }
        }
        live = std::move(next);
    }

    for (std::size_t i = 0; i < p; ++i) {
        if (reports[i].status == PathStatus::converged) normalize_row(batch.y.row(i));
    }
    batch.z_valid = false;
    return reports;
}

std::vector<double> batch_residuals(const PointBatch& batch, const HomotopyTables& tables, const Backend& backend,
                                    const EvalOptions& options) {
    return value_norms(evaluate_batch_checked(batch, tables, backend, options), tables);
}

std::vector<TrackResult> track_batch(const PointBatch& start, const HomotopyTables& tables,
                                     const TrackOptions& options, const Backend& backend) {
    options.validate();
    if (start.dim() != tables.variable_count)
        throw ShapeError("start points have " + std::to_string(start.dim()) + " coordinates, system needs " +
                         std::to_string(tables.variable_count));
    const std::size_t p = start.size();
    for (double t : start.tau)
        if (!(t < 0.0)) throw UsageError("start points must have tau < 0");

    PointBatch batch = start;
    for (std::size_t i = 0; i < p; ++i) normalize_row(batch.y.row(i));
    batch.z_valid = false;

    std::vector<TrackResult> results(p);
    const auto start_eval = evaluate_batch_checked(batch, tables, backend, options.eval);
    const auto start_res = value_norms(start_eval, tables);
    std::vector<std::size_t> to_track;
    std::size_t worst = p;
    for (std::size_t i = 0; i < p; ++i) {
        auto& r = results[i];
        r.start_y.assign(batch.y.row(i).begin(), batch.y.row(i).end());
        r.start_tau = batch.tau[i];
        r.y = r.start_y;
        r.tau = r.start_tau;
        if (start_eval.status[i] != PointStatus::ok) {
            r.status = status_of(start_eval.status[i]);
            r.residual = kInf;
            continue;
        }
        if (!options.skip_start_check && start_res[i] > options.start_tol &&
            (worst == p || start_res[i] > start_res[worst]))
            worst = i;
        to_track.push_back(i);
    }
    if (worst != p) throw StartPointInvalid(worst, start_res[worst]);

    PointBatch sub = gather(batch, to_track);
    auto seg = track_segment(std::move(sub), 0.0, tables, options, backend);

    // Polish points that reached tau = 0 with a few extra Newton iterations when needed.
    PointBatch end;
    end.y = std::move(seg.y);
    end.tau = std::move(seg.tau);
    auto residual = batch_residuals(end, tables, backend, options.eval);
    if (!options.fixed_step_mode) {
        for (int it = 0; it < options.newton_max_iters; ++it) {
            std::vector<std::size_t> polish;
            for (std::size_t r = 0; r < to_track.size(); ++r)
                if (seg.status[r] == PathStatus::converged && residual[r] > options.accept_tol) polish.push_back(r);
            if (polish.empty()) break;
            TrackOptions newton_only = options;
            newton_only.newton_max_iters = 1;
            PointBatch pb = gather(end, polish);
            const std::vector<double> zero(polish.size(), 0.0);
            const auto reps = euler_newton_step(pb, tables, zero, newton_only, backend);
            for (std::size_t r = 0; r < polish.size(); ++r) {
                seg.newton_iters[polish[r]] += static_cast<std::size_t>(reps[r].newton_iters);
                if (reps[r].status != PathStatus::converged) continue;
                std::copy(pb.y.row(r).begin(), pb.y.row(r).end(), end.y.row(polish[r]).begin());
            }
            residual = batch_residuals(end, tables, backend, options.eval);
        }
    }

    for (std::size_t r = 0; r < to_track.size(); ++r) {
        auto& res = results[to_track[r]];
        res.y.assign(end.y.row(r).begin(), end.y.row(r).end());
        res.tau = end.tau[r];
        res.steps_taken = seg.steps[r];
        res.newton_iters_total = seg.newton_iters[r];
        res.residual = residual[r];
        res.status = seg.status[r];
        if (res.status == PathStatus::converged && !(res.residual <= options.accept_tol))
            res.status = PathStatus::unconverged;
        finalize(res, tables, options);
    }
    return results;
}

double retrace_check(const TrackResult& result, const HomotopyTables& tables, const TrackOptions& options,
                     const Backend& backend) {
    if (result.status != PathStatus::converged) throw UsageError("retrace_check needs a converged result");
    if (!(result.start_tau < 0.0)) throw UsageError("retrace_check: zero-length track");
    if (result.y.size() != tables.variable_count) throw ShapeError("retrace_check: dimension mismatch");

    PointBatch b;
    b.y = ComplexMatrix(1, result.y.size(), result.y);
    b.tau = {result.tau};
    auto seg = track_segment(std::move(b), result.start_tau, tables, options, backend);
    if (seg.status[0] != PathStatus::converged || seg.tau[0] != result.start_tau) return kInf;
    return chordal_distance(seg.y.row(0), result.start_y);
}

}  // namespace phg
