// CBLAS/LAPACKE backed kernels. Compiled only when both libraries are found.
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <cblas.h>
#include <lapacke.h>

#include "phg/kernels.hpp"

namespace phg {

namespace {

class ExternalBackend final : public Backend {
public:
    std::string_view name() const noexcept override { return "external"; }

    void gemm(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& c) const override {
        if (a.cols() != b.rows()) throw ShapeError("gemm: inner dimensions differ");
        c = ComplexMatrix(a.rows(), b.cols());
        if (c.size() == 0) return;
        if (a.cols() == 0) return;
        const Complex one(1.0), zero(0.0);
        cblas_zgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(a.rows()),
                    static_cast<int>(b.cols()), static_cast<int>(a.cols()), &one, a.data(),
                    static_cast<int>(a.cols()), b.data(), static_cast<int>(b.cols()), &zero, c.data(),
                    static_cast<int>(c.cols()));
    }

protected:
    QrOutcome qr_one(const ComplexMatrix& input, double rank_tol) const override {
        const auto m = static_cast<lapack_int>(input.rows());
        const auto k = static_cast<lapack_int>(input.cols());
        if (m < k) throw ShapeError("householder_qr: more columns than rows");

        // Reflectors live in the first k columns of an m x m buffer so zungqr can
        // expand them into the full square Q in place.
        ComplexMatrix work(input.rows(), input.rows());
        for (std::size_t i = 0; i < input.rows(); ++i)
            for (std::size_t j = 0; j < input.cols(); ++j) work(i, j) = input(i, j);
        std::vector<Complex> tau(std::max<std::size_t>(1, input.cols()));

        if (LAPACKE_zgeqrf(LAPACK_ROW_MAJOR, m, k, work.data(), m, tau.data()) != 0)
            throw Error("LapackError", "zgeqrf failed");

        QrOutcome out;
        out.factor.r = ComplexMatrix(input.cols(), input.cols());
        for (std::size_t i = 0; i < input.cols(); ++i)
            for (std::size_t j = i; j < input.cols(); ++j) out.factor.r(i, j) = work(i, j);

        if (LAPACKE_zungqr(LAPACK_ROW_MAJOR, m, m, k, work.data(), m, tau.data()) != 0)
            throw Error("LapackError", "zungqr failed");
        out.factor.q = std::move(work);

        out.factor.min_abs_diag = input.cols() == 0 ? 0.0 : std::abs(out.factor.r(0, 0));
        for (std::size_t i = 0; i < input.cols(); ++i) {
            const double d = std::abs(out.factor.r(i, i));
            out.factor.min_abs_diag = std::min(out.factor.min_abs_diag, d);
            double col2 = 0.0;
            for (std::size_t r = 0; r < input.rows(); ++r) col2 += std::norm(input(r, i));
            if (!out.rank_deficient_column && d <= rank_tol * std::sqrt(col2)) out.rank_deficient_column = i;
        }
        return out;
    }
};

}  // namespace

std::shared_ptr<const Backend> make_external_backend() { return std::make_shared<ExternalBackend>(); }

}  // namespace phg
