#include "phg/eval.hpp"

#include <algorithm>
#include <thread>

#include "monomial.hpp"

namespace phg {

namespace {

// Principal branch with imaginary part in (-pi, pi]; a negative zero imaginary
// part would otherwise map -1 to -i*pi.
Complex principal_log(Complex v) { return std::log(Complex(v.real(), v.imag() == 0.0 ? 0.0 : v.imag())); }

bool row_finite(std::span<const Complex> row) {
    return std::all_of(row.begin(), row.end(),
                       [](const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

void check_dims(const PointBatch& batch, const HomotopyTables& tables) {
    if (batch.dim() != tables.variable_count) {
        throw ShapeError("points have " + std::to_string(batch.dim()) + " homogeneous coordinates but the system has " +
                         std::to_string(tables.variable_count));
    }
}

ExtendedJacobianBatch empty_jacobian(const HomotopyTables& tables, std::size_t points, Coords coords) {
    ExtendedJacobianBatch jac;
    jac.coords = coords;
    jac.equations = tables.equation_count;
    jac.variables = tables.variable_count;
    jac.data = ComplexMatrix(points, tables.equation_count * tables.block_cols());
    return jac;
}

// Evaluates rows [first, first + count) into `out` (homogeneous coordinates).
// Failed rows are zeroed before each product so they cannot affect others.
void evaluate_rows(const PointBatch& pts, std::size_t first, std::size_t count, const HomotopyTables& t,
                   const Backend& backend, ComplexMatrix& out, std::span<PointStatus> status) {
    const std::size_t N = t.variable_count;
    const std::size_t bc = t.block_cols();
    ComplexMatrix zaug(count, N + 1);
    ComplexMatrix inv_y(count, N);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t i = first + r;
        status[i] = PointStatus::ok;
        for (std::size_t j = 0; j < N; ++j) {
            if (pts.y(i, j) == Complex(0.0)) {
                status[i] = PointStatus::zero_coordinate;
                break;
            }
        }
        if (status[i] != PointStatus::ok) continue;
        for (std::size_t j = 0; j < N; ++j) {
            const Complex z = principal_log(pts.y(i, j));
            zaug(r, j) = z;
            inv_y(r, j) = std::exp(-z);
        }
        zaug(r, N) = pts.tau[i];
    }

    ComplexMatrix monomials = gemm(backend, zaug, t.a_hat);
    elementwise_exp_inplace(monomials);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t i = first + r;
        if (status[i] == PointStatus::ok && !row_finite(monomials.row(r))) status[i] = PointStatus::overflow;
        if (status[i] != PointStatus::ok) std::fill(monomials.row(r).begin(), monomials.row(r).end(), Complex(0.0));
    }

    ComplexMatrix jac = gemm(backend, monomials, t.b_concat);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t i = first + r;
        auto row = jac.row(r);
        if (status[i] == PointStatus::ok) {
            for (std::size_t k = 0; k < t.equation_count; ++k)
                for (std::size_t j = 0; j < N; ++j) row[k * bc + j] *= inv_y(r, j);
            if (!row_finite(row)) status[i] = PointStatus::overflow;
        }
        if (status[i] != PointStatus::ok) std::fill(row.begin(), row.end(), Complex(0.0));
        std::copy(row.begin(), row.end(), out.row(i).begin());
    }
}

}  // namespace

PointBatch make_point_batch(ComplexMatrix y, std::vector<double> tau) {
    if (tau.size() != y.rows())
        throw ShapeError("point batch has " + std::to_string(y.rows()) + " points but " + std::to_string(tau.size()) +
                         " tau values");
    for (double t : tau)
        if (!(t <= 0.0)) throw UsageError("path parameter tau must be <= 0");
    PointBatch b;
    b.y = std::move(y);
    b.tau = std::move(tau);
    return b;
}

ComplexMatrix ExtendedJacobianBatch::block(std::size_t point) const {
    ComplexMatrix out(equations, block_cols());
    const auto row = data.row(point);
    std::copy(row.begin(), row.end(), out.data());
    return out;
}

PointBatch to_log_coords(PointBatch batch) {
    batch.z = ComplexMatrix(batch.size(), batch.dim());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t j = 0; j < batch.dim(); ++j) {
            if (batch.y(i, j) == Complex(0.0)) throw ZeroCoordinate(i, j);
            batch.z(i, j) = principal_log(batch.y(i, j));
        }
    }
    batch.z_valid = true;
    return batch;
}

ExtendedJacobianBatch eval_extended_jacobian_log(const PointBatch& batch, const HomotopyTables& tables,
                                                 const Backend& backend) {
    if (!batch.z_valid) throw UsageError("logarithmic coordinates have not been computed");
    check_dims(batch, tables);
    const std::size_t N = tables.variable_count;

    ComplexMatrix zaug(batch.size(), N + 1);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t j = 0; j < N; ++j) zaug(i, j) = batch.z(i, j);
        zaug(i, N) = batch.tau[i];
    }
    ComplexMatrix monomials = gemm(backend, zaug, tables.a_hat);
    elementwise_exp_inplace(monomials);
    for (std::size_t i = 0; i < batch.size(); ++i)
        if (!row_finite(monomials.row(i))) throw MonomialOverflow(i);

    ExtendedJacobianBatch jac = empty_jacobian(tables, 0, Coords::log);
    backend.gemm(monomials, tables.b_concat, jac.data);
    for (std::size_t i = 0; i < batch.size(); ++i)
        if (!row_finite(jac.data.row(i))) throw MonomialOverflow(i);
    return jac;
}

ExtendedJacobianBatch rescale_to_homogeneous(ExtendedJacobianBatch jac, const PointBatch& batch) {
    if (jac.coords != Coords::log) throw UsageError("rescale_to_homogeneous expects log coordinates");
    if (!batch.z_valid) throw UsageError("logarithmic coordinates have not been computed");
    if (batch.dim() != jac.variables || batch.size() != jac.size())
        throw ShapeError("rescale_to_homogeneous: batch has " + std::to_string(batch.size()) + "x" +
                         std::to_string(batch.dim()) + " coordinates, Jacobian expects " +
                         std::to_string(jac.size()) + "x" + std::to_string(jac.variables));
    const std::size_t bc = jac.block_cols();
    for (std::size_t i = 0; i < jac.size(); ++i) {
        for (std::size_t j = 0; j < jac.variables; ++j) {
            const Complex s = std::exp(-batch.z(i, j));
            for (std::size_t k = 0; k < jac.equations; ++k) jac.data(i, k * bc + j) *= s;
        }
    }
    jac.coords = Coords::homogeneous;
    return jac;
}

ComplexMatrix eval_scalar_oracle(std::span<const Complex> y, double tau, const HomogenizedSystem& sys) {
    const std::size_t n = sys.n();
    const std::size_t N = sys.N();
    if (y.size() != N) throw ShapeError("oracle: point has wrong length");
    const auto omega = sys.base.lifting_values();
    const auto& c = sys.base.coefficients();

    ComplexMatrix out(n, N + 2);
    std::vector<Complex> powers(N);
    for (std::size_t i = 0; i < sys.m(); ++i) {
        const auto& e = sys.hom_support[i];
        for (std::size_t j = 0; j < N; ++j) {
            if (y[j] == Complex(0.0) && e[j] < 0) throw ZeroCoordinate(0, j);
            powers[j] = detail::ipow(y[j], e[j]);
        }
        const Complex lift = std::exp(tau * omega[i]);
        Complex term = lift;
        for (std::size_t j = 0; j < N; ++j) term *= powers[j];

        for (std::size_t k = 0; k < n; ++k) {
            out(k, N) += c(k, i) * omega[i] * term;
            out(k, N + 1) += c(k, i) * term;
        }
        for (std::size_t j = 0; j < N; ++j) {
            if (e[j] == 0) continue;
            Complex d = lift * static_cast<double>(e[j]) * detail::ipow(y[j], e[j] - 1);
            for (std::size_t l = 0; l < N; ++l)
                if (l != j) d *= powers[l];
            for (std::size_t k = 0; k < n; ++k) out(k, j) += c(k, i) * d;
        }
    }
    return out;
}

std::size_t default_batch_size(std::size_t points) { return std::max<std::size_t>(1, (points + 3) / 4); }

EvalOutcome evaluate_batch_checked(const PointBatch& points, const HomotopyTables& tables, const Backend& backend,
                                   const EvalOptions& options) {
    check_dims(points, tables);
    const std::size_t p = points.size();
    EvalOutcome result{empty_jacobian(tables, p, Coords::homogeneous), std::vector<PointStatus>(p, PointStatus::ok)};
    if (p == 0) return result;
    if (points.tau.size() != p) throw ShapeError("point batch has mismatched tau values");

    const std::size_t b = options.batch_size == 0 ? default_batch_size(p) : std::min(options.batch_size, p);
    const std::size_t batches = (p + b - 1) / b;

    auto run = [&](std::size_t s) {
        const std::size_t first = s * b;
        evaluate_rows(points, first, std::min(b, p - first), tables, backend, result.jac.data, result.status);
    };
    const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, batches);
    if (workers == 1) {
        for (std::size_t s = 0; s < batches; ++s) run(s);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t s = w; s < batches; s += workers) run(s);
            });
    }
    return result;
}

ExtendedJacobianBatch evaluate_batch(const PointBatch& points, const HomotopyTables& tables, const Backend& backend,
                                     const EvalOptions& options) {
    check_dims(points, tables);
    const std::size_t p = points.size();
    const std::size_t b = options.batch_size == 0 ? default_batch_size(p) : std::min(options.batch_size, p);
    EvalOutcome outcome = evaluate_batch_checked(points, tables, backend, options);
    for (std::size_t i = 0; i < p; ++i) {
        if (outcome.status[i] == PointStatus::ok) continue;
        const std::size_t sub = i / b;
        if (outcome.status[i] == PointStatus::zero_coordinate) {
            std::size_t j = 0;
            while (j < points.dim() && points.y(i, j) != Complex(0.0)) ++j;
            ZeroCoordinate inner(i, j);
            throw SubBatchError(sub, inner, std::make_exception_ptr(inner));
        }
        MonomialOverflow inner(i);
        throw SubBatchError(sub, inner, std::make_exception_ptr(inner));
    }
    return std::move(outcome.jac);
}

}  // namespace phg
