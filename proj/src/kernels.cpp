#include "phg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace phg {

namespace {

void check_gemm_shapes(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("gemm: inner dimensions differ (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
    }
}

double default_rank_tol(std::size_t rows) { return 1e-12 * static_cast<double>(rows); }

}  // namespace

// ---------------------------------------------------------------------------
// Householder QR

QrOutcome householder_qr(const ComplexMatrix& input, double rank_tol) {
    const std::size_t m = input.rows();
    const std::size_t k = input.cols();
    if (m < k) throw ShapeError("householder_qr: more columns than rows");
    if (rank_tol < 0.0) rank_tol = default_rank_tol(m);

    ComplexMatrix a = input;
    ComplexMatrix q = ComplexMatrix::identity(m);
    std::vector<Complex> v(m);
    std::vector<Complex> w(std::max(m, k));

    for (std::size_t j = 0; j < k; ++j) {
        double alpha2 = 0.0;
        for (std::size_t i = j; i < m; ++i) alpha2 += std::norm(a(i, j));
        const double alpha = std::sqrt(alpha2);
        if (alpha == 0.0) continue;

        const Complex x0 = a(j, j);
        const double ax0 = std::abs(x0);
        const Complex phase = ax0 == 0.0 ? Complex(1.0) : x0 / ax0;
        const Complex beta = -phase * alpha;

        for (std::size_t i = j; i < m; ++i) v[i] = a(i, j);
        v[j] -= beta;
        double vnorm2 = 0.0;
        for (std::size_t i = j; i < m; ++i) vnorm2 += std::norm(v[i]);
        const double scale = 2.0 / vnorm2;

        // a[j:, j+1:] -= scale * v * (v^H a[j:, j+1:])
        for (std::size_t c = j + 1; c < k; ++c) {
            Complex s = 0.0;
            for (std::size_t i = j; i < m; ++i) s += std::conj(v[i]) * a(i, c);
            s *= scale;
            for (std::size_t i = j; i < m; ++i) a(i, c) -= s * v[i];
        }
        a(j, j) = beta;
        for (std::size_t i = j + 1; i < m; ++i) a(i, j) = 0.0;

        // q[:, j:] -= scale * (q[:, j:] v) v^H
        for (std::size_t r = 0; r < m; ++r) {
            Complex s = 0.0;
            for (std::size_t i = j; i < m; ++i) s += q(r, i) * v[i];
            s *= scale;
            for (std::size_t i = j; i < m; ++i) q(r, i) -= s * std::conj(v[i]);
        }
    }

    QrOutcome out;
    out.factor.q = std::move(q);
    out.factor.r = ComplexMatrix(k, k);
    out.factor.min_abs_diag = k == 0 ? 0.0 : std::abs(a(0, 0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) out.factor.r(i, j) = a(i, j);
        const double d = std::abs(a(i, i));
        out.factor.min_abs_diag = std::min(out.factor.min_abs_diag, d);

        double col2 = 0.0;
        for (std::size_t r = 0; r < m; ++r) col2 += std::norm(input(r, i));
        if (!out.rank_deficient_column && d <= rank_tol * std::sqrt(col2)) out.rank_deficient_column = i;
    }
    return out;
}

QrOutcome Backend::qr_one(const ComplexMatrix& a, double rank_tol) const { return householder_qr(a, rank_tol); }

std::vector<QrOutcome> Backend::batched_qr(std::span<const ComplexMatrix> batch, const QrOptions& options) const {
    std::vector<QrOutcome> out(batch.size());
    if (batch.empty()) return out;
    const std::size_t rows = batch.front().rows();
    const std::size_t cols = batch.front().cols();
    for (const auto& m : batch) {
        if (m.rows() != rows || m.cols() != cols) throw ShapeError("batched_qr: batch elements differ in shape");
    }
    const double tol = options.rank_tol < 0.0 ? default_rank_tol(rows) : options.rank_tol;

    const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, batch.size());
    if (workers == 1) {
        for (std::size_t i = 0; i < batch.size(); ++i) out[i] = qr_one(batch[i], tol);
        return out;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (batch.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t first = w * chunk;
        const std::size_t last = std::min(batch.size(), first + chunk);
        if (first >= last) break;
        pool.emplace_back([&, first, last] {
            for (std::size_t i = first; i < last; ++i) out[i] = qr_one(batch[i], tol);
        });
    }
    pool.clear();
    return out;
}

// ---------------------------------------------------------------------------
// GEMM

void ReferenceBackend::gemm(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& c) const {
    check_gemm_shapes(a, b);
    c = ComplexMatrix(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
}

void BlockedBackend::gemm(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& c) const {
    check_gemm_shapes(a, b);
    const std::size_t p = a.rows();
    const std::size_t m = a.cols();
    const std::size_t q = b.cols();
    c = ComplexMatrix(p, q);
    if (p == 0 || q == 0) return;

    constexpr std::size_t kRowBlock = 8;
    constexpr std::size_t kDepthBlock = 64;

    // Planar copy of b so the inner loop streams two contiguous real arrays.
    std::vector<double> br(m * q), bi(m * q);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t j = 0; j < q; ++j) {
            br[k * q + j] = b(k, j).real();
            bi[k * q + j] = b(k, j).imag();
        }
    }

    std::vector<double> cr(kRowBlock * q), ci(kRowBlock * q);
    for (std::size_t i0 = 0; i0 < p; i0 += kRowBlock) {
        const std::size_t rows = std::min(kRowBlock, p - i0);
        std::fill(cr.begin(), cr.end(), 0.0);
        std::fill(ci.begin(), ci.end(), 0.0);
        // Every entry accumulates over k in ascending order regardless of the
        // block sizes, so a row's result never depends on its neighbours.
        for (std::size_t k0 = 0; k0 < m; k0 += kDepthBlock) {
            const std::size_t k1 = std::min(m, k0 + kDepthBlock);
            for (std::size_t r = 0; r < rows; ++r) {
                double* __restrict crr = cr.data() + r * q;
                double* __restrict cir = ci.data() + r * q;
                for (std::size_t k = k0; k < k1; ++k) {
                    const double ar = a(i0 + r, k).real();
                    const double ai = a(i0 + r, k).imag();
                    const double* __restrict brk = br.data() + k * q;
                    const double* __restrict bik = bi.data() + k * q;
                    for (std::size_t j = 0; j < q; ++j) {
                        crr[j] += ar * brk[j] - ai * bik[j];
                        cir[j] += ar * bik[j] + ai * brk[j];
                    }
                }
            }
        }
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < q; ++j) c(i0 + r, j) = Complex(cr[r * q + j], ci[r * q + j]);
    }
}

ComplexMatrix gemm(const Backend& backend, const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix c;
    backend.gemm(a, b, c);
    return c;
}

// ---------------------------------------------------------------------------
// Elementwise

void elementwise_exp_inplace(ComplexMatrix& a) {
    for (auto& v : a.values()) v = std::exp(v);
}

ComplexMatrix elementwise_exp(const ComplexMatrix& a) {
    ComplexMatrix out = a;
    elementwise_exp_inplace(out);
    return out;
}

// ---------------------------------------------------------------------------
// Registry

#ifdef PHG_HAVE_EXTERNAL
std::shared_ptr<const Backend> make_external_backend();
#endif

std::vector<std::string> available_backends() {
    std::vector<std::string> names{"reference", "blocked"};
#ifdef PHG_HAVE_EXTERNAL
    names.emplace_back("external");
#endif
    return names;
}

std::shared_ptr<const Backend> make_backend(std::string_view name) {
    if (name == "reference") return std::make_shared<ReferenceBackend>();
    if (name == "blocked") return std::make_shared<BlockedBackend>();
#ifdef PHG_HAVE_EXTERNAL
    if (name == "external") return make_external_backend();
#endif
    std::string known;
    for (const auto& n : available_backends()) known += (known.empty() ? "" : ", ") + n;
    throw UsageError("unknown backend '" + std::string(name) + "' (available: " + known + ")");
}

std::shared_ptr<const Backend> default_backend() {
    const char* env = std::getenv("PHG_BACKEND");
    return make_backend(env != nullptr && *env != '\0' ? std::string_view(env) : std::string_view("reference"));
}

}  // namespace phg
