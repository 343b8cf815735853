#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phg/complex_matrix.hpp"

namespace phg {

/// Householder QR of an (N+2) x N matrix: input = q * [r; 0].
struct QrFactor {
    ComplexMatrix q;  // (N+2) x (N+2), unitary
    ComplexMatrix r;  // N x N, upper triangular
    double min_abs_diag = 0.0;
};

/// Per-element outcome of a batched QR. `rank_deficient_column` is set when
/// |R_ii| < rank_tol * ||column i||; the factor is still filled in.
struct QrOutcome {
    QrFactor factor;
    std::optional<std::size_t> rank_deficient_column;

    bool ok() const noexcept { return !rank_deficient_column.has_value(); }
};

struct QrOptions {
    /// Relative rank tolerance. A negative value selects 1e-12 * rows.
    double rank_tol = -1.0;
    /// Number of worker threads the batch is partitioned over.
    std::size_t workers = 1;
};

/// Dense kernel provider. All implementations are stateless and thread safe.
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string_view name() const noexcept = 0;

    /// c = a * b. `c` is resized as needed.
    virtual void gemm(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& c) const = 0;

    /// Householder QR of every matrix in the batch; output order matches input.
    virtual std::vector<QrOutcome> batched_qr(std::span<const ComplexMatrix> batch,
                                              const QrOptions& options = {}) const;

protected:
    /// Factors a single matrix. Must not depend on any other batch element.
    virtual QrOutcome qr_one(const ComplexMatrix& a, double rank_tol) const;
};

/// Plain triple-loop kernels; the oracle every other backend is checked against.
class ReferenceBackend final : public Backend {
public:
    std::string_view name() const noexcept override { return "reference"; }
    void gemm(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& c) const override;
};

/// Cache-blocked kernels with split real/imaginary accumulation.
class BlockedBackend final : public Backend {
public:
    std::string_view name() const noexcept override { return "blocked"; }
    void gemm(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& c) const override;
};

/// Names accepted by make_backend on this build ("external" only when built with CBLAS/LAPACKE).
std::vector<std::string> available_backends();

/// Creates a backend by name: "reference", "blocked" or "external". Throws UsageError.
std::shared_ptr<const Backend> make_backend(std::string_view name);

/// Backend named by $PHG_BACKEND, or "reference" when unset.
std::shared_ptr<const Backend> default_backend();

/// Convenience wrapper: returns a * b via the given backend.
ComplexMatrix gemm(const Backend& backend, const ComplexMatrix& a, const ComplexMatrix& b);

/// out_ij = exp(a_ij).
ComplexMatrix elementwise_exp(const ComplexMatrix& a);
void elementwise_exp_inplace(ComplexMatrix& a);

/// Householder QR of one matrix with the portable implementation.
QrOutcome householder_qr(const ComplexMatrix& a, double rank_tol = -1.0);

}  // namespace phg
