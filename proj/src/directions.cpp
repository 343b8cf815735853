#include "phg/directions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phg {

namespace {

struct LuSolution {
    std::vector<std::vector<Complex>> x;
    double min_pivot = 0.0;
};

// Gaussian elimination with partial pivoting on several right-hand sides.
LuSolution lu_solve(ComplexMatrix a, std::vector<std::vector<Complex>> rhs) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw ShapeError("solve: matrix is not square");
    for (const auto& b : rhs)
        if (b.size() != n) throw ShapeError("solve: right-hand side has wrong length");

    double scale = 0.0;
    for (const auto& v : a.values()) scale = std::max(scale, std::abs(v));
    const double tiny = scale * 1e-14 * static_cast<double>(std::max<std::size_t>(n, 1));

    LuSolution out;
    out.min_pivot = n == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        const double mag = std::abs(a(piv, col));
        if (!(mag > tiny)) throw SingularJacobian(0);
        out.min_pivot = std::min(out.min_pivot, mag);
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(piv, c), a(col, c));
            for (auto& b : rhs) std::swap(b[piv], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const Complex f = a(r, col) / a(col, col);
            if (f == Complex(0.0)) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            for (auto& b : rhs) b[r] -= f * b[col];
        }
    }
    for (auto& b : rhs) {
        for (std::size_t i = n; i-- > 0;) {
            Complex s = b[i];
            for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * b[c];
            b[i] = s / a(i, i);
        }
    }
    out.x = std::move(rhs);
    return out;
}

// ||A x + col|| over the first `rows` rows of a bordered matrix.
double defining_residual(const ComplexMatrix& j, std::size_t rows, std::span<const Complex> x, std::size_t col) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        Complex acc = j(r, col);
        for (std::size_t c = 0; c < x.size(); ++c) acc += j(r, c) * x[c];
        s += std::norm(acc);
    }
    return std::sqrt(s);
}

}  // namespace

std::vector<Complex> solve_dense(ComplexMatrix a, std::vector<Complex> b) {
    auto sol = lu_solve(std::move(a), {std::move(b)});
    return std::move(sol.x.front());
}

BorderedJacobian assemble_bordered(const ComplexMatrix& jac_block, std::span<const Complex> y) {
    const std::size_t n = jac_block.rows();
    const std::size_t N = y.size();
    if (N != n + 1 || jac_block.cols() != N + 2)
        throw ShapeError("assemble_bordered: block is " + std::to_string(jac_block.rows()) + "x" +
                         std::to_string(jac_block.cols()) + " but point has " + std::to_string(N) + " coordinates");
    BorderedJacobian out{ComplexMatrix(N, N + 2)};
    std::copy(jac_block.values().begin(), jac_block.values().end(), out.j.data());
    for (std::size_t c = 0; c < N; ++c) out.j(n, c) = std::conj(y[c]);
    return out;
}

std::vector<DirectionOutcome> euler_newton_unified_checked(std::span<const BorderedJacobian> batch,
                                                           const Backend& backend, const DirectionOptions& options) {
    std::vector<ComplexMatrix> transposed;
    transposed.reserve(batch.size());
    for (const auto& b : batch) {
        if (b.j.cols() != b.j.rows() + 2) throw ShapeError("bordered Jacobian must be N x (N+2)");
        transposed.push_back(b.j.transpose());
    }
    const auto factors = backend.batched_qr(transposed, QrOptions{options.rank_tol, options.workers});

    std::vector<DirectionOutcome> out(batch.size());
    for (std::size_t e = 0; e < batch.size(); ++e) {
        const auto& qr = factors[e];
        const ComplexMatrix& q = qr.factor.q;
        const std::size_t N = batch[e].j.rows();
        auto& res = out[e];
        res.pair.cond_signal = qr.factor.min_abs_diag;
        if (!qr.ok()) {
            res.status = DirectionStatus::singular_jacobian;
            continue;
        }

        // Null-space basis: rows N, N+1 of Q^H.
        auto v = [&](std::size_t r, std::size_t c) { return std::conj(q(c, N + r)); };
        const Complex t00 = v(0, N), t01 = v(0, N + 1), t10 = v(1, N), t11 = v(1, N + 1);
        const Complex det = t00 * t11 - t01 * t10;
        if (!(std::abs(det) >= options.det_tol)) {
            res.status = DirectionStatus::degenerate_tangent;
            continue;
        }
        // Rows of T^{-1} V; T^{-1} = [[t11, -t01], [-t10, t00]] / det.
        res.pair.euler.resize(N);
        res.pair.newton.resize(N);
        for (std::size_t c = 0; c < N; ++c) {
            res.pair.euler[c] = (t11 * v(0, c) - t01 * v(1, c)) / det;
            res.pair.newton[c] = (-t10 * v(0, c) + t00 * v(1, c)) / det;
        }
        const ComplexMatrix& j = batch[e].j;
        res.pair.residual_euler = defining_residual(j, N - 1, res.pair.euler, N);
        res.pair.residual_newton = defining_residual(j, N - 1, res.pair.newton, N + 1);
    }
    return out;
}

std::vector<DirectionPair> euler_newton_unified(std::span<const BorderedJacobian> batch, const Backend& backend,
                                                const DirectionOptions& options) {
    auto checked = euler_newton_unified_checked(batch, backend, options);
    std::vector<DirectionPair> out;
    out.reserve(checked.size());
    for (std::size_t e = 0; e < checked.size(); ++e) {
        if (checked[e].status == DirectionStatus::singular_jacobian) throw SingularJacobian(e);
        if (checked[e].status == DirectionStatus::degenerate_tangent) throw DegenerateTangent(e);
        out.push_back(std::move(checked[e].pair));
    }
    return out;
}

DirectionPair euler_newton_direct(const ComplexMatrix& jac_block, std::span<const Complex> y) {
    const BorderedJacobian b = assemble_bordered(jac_block, y);
    const std::size_t N = y.size();
    ComplexMatrix m(N, N);
    std::vector<Complex> rhs_e(N), rhs_n(N);
    for (std::size_t r = 0; r < N; ++r) {
        for (std::size_t c = 0; c < N; ++c) m(r, c) = b.j(r, c);
        rhs_e[r] = -b.j(r, N);
        rhs_n[r] = -b.j(r, N + 1);
    }
    auto sol = lu_solve(std::move(m), {std::move(rhs_e), std::move(rhs_n)});
    DirectionPair out;
    out.euler = std::move(sol.x[0]);
    out.newton = std::move(sol.x[1]);
    out.cond_signal = sol.min_pivot;
    out.residual_euler = defining_residual(b.j, N - 1, out.euler, N);
    out.residual_newton = defining_residual(b.j, N - 1, out.newton, N + 1);
    return out;
}

AffineDirections affine_directions(const ComplexMatrix& aff_block, std::span<const Complex> x) {
    const std::size_t n = x.size();
    if (aff_block.rows() != n || aff_block.cols() != n + 2)
        throw ShapeError("affine_directions: block must be n x (n+2)");
    ComplexMatrix m(n, n);
    std::vector<Complex> rhs_e(n), rhs_n(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) m(r, c) = aff_block(r, c);
        rhs_e[r] = -aff_block(r, n);
        rhs_n[r] = -aff_block(r, n + 1);
    }
    auto sol = lu_solve(std::move(m), {std::move(rhs_e), std::move(rhs_n)});
    return {std::move(sol.x[0]), std::move(sol.x[1])};
}

}  // namespace phg
