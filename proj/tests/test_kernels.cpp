#include <doctest.h>

#include <numbers>

#include "phg/error.hpp"
#include "support.hpp"

using namespace phg;
using test::random_matrix;
using test::rel_diff;

namespace {

std::vector<std::shared_ptr<const Backend>> all_backends() {
    std::vector<std::shared_ptr<const Backend>> out;
    for (const auto& name : available_backends()) out.push_back(make_backend(name));
    return out;
}

ComplexMatrix reconstruct(const QrFactor& f) {
    const std::size_t rows = f.q.rows(), cols = f.r.cols();
    ComplexMatrix rr(rows, cols);
    for (std::size_t i = 0; i < cols; ++i)
        for (std::size_t j = 0; j < cols; ++j) rr(i, j) = f.r(i, j);
    return test::triple_loop(f.q, rr);
}

double unitarity_error(const ComplexMatrix& q) {
    const ComplexMatrix qhq = test::triple_loop(q.adjoint(), q);
    return max_abs_diff(qhq, ComplexMatrix::identity(q.rows()));
}

}  // namespace

TEST_CASE("backend registry") {
    const auto names = available_backends();
    CHECK(std::find(names.begin(), names.end(), "reference") != names.end());
    CHECK(std::find(names.begin(), names.end(), "blocked") != names.end());
    for (const auto& name : names) CHECK(make_backend(name)->name() == name);
    CHECK_THROWS_AS(make_backend("gpu"), UsageError);
}

TEST_CASE("complex matrix basics") {
    CHECK_THROWS_AS(ComplexMatrix(2, 2, std::vector<Complex>(3)), ShapeError);
    const ComplexMatrix a = ComplexMatrix::from_rows({{1.0, Complex(0, 1)}, {2.0, 3.0}});
    CHECK(a.transpose()(0, 1) == Complex(2.0));
    CHECK(a.adjoint()(1, 0) == Complex(0, -1));
    CHECK(frobenius_norm(a) == doctest::Approx(std::sqrt(15.0)));
    CHECK(a.row_block(1, 1) == ComplexMatrix::from_rows({{2.0, 3.0}}));
}

TEST_CASE("gemm examples on every backend") {
    std::mt19937_64 rng(5);
    const ComplexMatrix x = random_matrix(rng, 3, 3);
    const ComplexMatrix a = ComplexMatrix::from_rows({{1.0, Complex(0, 1)}, {0.0, 1.0}});
    const ComplexMatrix b = ComplexMatrix::from_rows({{1.0}, {Complex(0, 1)}});
    const ComplexMatrix a75 = random_matrix(rng, 7, 5), b54 = random_matrix(rng, 5, 4);
    const ComplexMatrix ref75 = test::triple_loop(a75, b54);
    // Fixed product computed independently.
    const ComplexMatrix f1 = ComplexMatrix::from_rows(
        {{1.0, Complex(0, 1), 2.0}, {0.0, -1.0, 0.5}, {Complex(0, 2), 1.0, 1.0}, {1.0, 0.0, Complex(0, -1)}});
    const ComplexMatrix f2 = ComplexMatrix::from_rows({{1.0, 2.0}, {Complex(0, 1), 0.0}, {0.5, Complex(0, -1)}});
    const ComplexMatrix f12 = ComplexMatrix::from_rows({{1.0, Complex(2, -2)},
                                                        {Complex(0.25, -1), Complex(0, -0.5)},
                                                        {Complex(0.5, 3), Complex(0, 3)},
                                                        {Complex(1, -0.5), 1.0}});
    for (const auto& be : all_backends()) {
        CAPTURE(be->name());
        CHECK(gemm(*be, ComplexMatrix::identity(3), x) == x);
        const ComplexMatrix ab = gemm(*be, a, b);
        CHECK(ab == ComplexMatrix::from_rows({{0.0}, {Complex(0, 1)}}));
        CHECK(rel_diff(gemm(*be, a75, b54), ref75) <= 1e-13);
        CHECK(max_abs_diff(gemm(*be, f1, f2), f12) <= 1e-15);
        CHECK_THROWS_AS(gemm(*be, a75, a75), ShapeError);
        CHECK(gemm(*be, ComplexMatrix(0, 3), ComplexMatrix(3, 2)).rows() == 0);
    }
}

TEST_CASE("gemm associativity and backend agreement") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const ComplexMatrix a = random_matrix(rng, 8, 8), b = random_matrix(rng, 8, 8), c = random_matrix(rng, 8, 8);
        for (const auto& be : all_backends()) {
            CAPTURE(be->name());
            const ComplexMatrix left = gemm(*be, gemm(*be, a, b), c);
            const ComplexMatrix right = gemm(*be, a, gemm(*be, b, c));
            CHECK(rel_diff(left, right) <= 1e-10);
        }
    }
    const ComplexMatrix big_a = random_matrix(rng, 37, 150), big_b = random_matrix(rng, 150, 61);
    const ComplexMatrix ref = test::triple_loop(big_a, big_b);
    for (const auto& be : all_backends()) {
        CAPTURE(be->name());
        CHECK(rel_diff(gemm(*be, big_a, big_b), ref) <= 1e-12);
    }
}

TEST_CASE("blocked gemm rows do not depend on the other rows") {
    std::mt19937_64 rng(8);
    const ComplexMatrix a = random_matrix(rng, 29, 70), b = random_matrix(rng, 70, 33);
    const auto be = make_backend("blocked");
    const ComplexMatrix full = gemm(*be, a, b);
    for (std::size_t first : {0u, 5u, 17u}) {
        const ComplexMatrix part = gemm(*be, a.row_block(first, 9), b);
        CHECK(part == full.row_block(first, 9));
    }
}

TEST_CASE("elementwise exp") {
    CHECK(elementwise_exp(ComplexMatrix(2, 3)) == ComplexMatrix::from_rows({{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}}));
    const ComplexMatrix ipi = ComplexMatrix::from_rows({{Complex(0, std::numbers::pi)}});
    CHECK(std::abs(elementwise_exp(ipi)(0, 0) - Complex(-1.0)) <= 1e-15);
    std::mt19937_64 rng(9);
    const ComplexMatrix r = random_matrix(rng, 4, 4);
    const ComplexMatrix e = elementwise_exp(r);
    for (std::size_t k = 0; k < r.size(); ++k) CHECK(e.data()[k] == std::exp(r.data()[k]));
    ComplexMatrix inplace = r;
    elementwise_exp_inplace(inplace);
    CHECK(inplace == e);
}

TEST_CASE("householder QR examples") {
    for (const auto& be : all_backends()) {
        CAPTURE(be->name());
        SUBCASE("already triangular") {
            const ComplexMatrix a = ComplexMatrix::from_rows({{1.0}, {0.0}, {0.0}});
            const auto out = be->batched_qr(std::vector<ComplexMatrix>{a});
            REQUIRE(out[0].ok());
            CHECK(std::abs(std::abs(out[0].factor.r(0, 0)) - 1.0) <= 1e-15);
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j)
                    CHECK(std::abs(std::abs(out[0].factor.q(i, j)) - (i == j ? 1.0 : 0.0)) <= 1e-15);
        }
        SUBCASE("canonical embedding") {
            const std::size_t N = 4;
            ComplexMatrix a(N + 2, N);
            for (std::size_t i = 0; i < N; ++i) a(i, i) = 1.0;
            const auto out = be->batched_qr(std::vector<ComplexMatrix>{a});
            REQUIRE(out[0].ok());
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j)
                    CHECK(std::abs(std::abs(out[0].factor.r(i, j)) - (i == j ? 1.0 : 0.0)) <= 1e-15);
            // Last two columns of Q live in the padding rows.
            for (std::size_t c = N; c < N + 2; ++c)
                for (std::size_t r = 0; r < N; ++r) CHECK(std::abs(out[0].factor.q(r, c)) <= 1e-15);
        }
        SUBCASE("fixed matrix matches an independent factorization") {
            const ComplexMatrix a = ComplexMatrix::from_rows(
                {{Complex(1, 1), 2.0}, {Complex(0, 0.5), -1.0}, {3.0, Complex(1, -2)}, {Complex(0, -1), 0.25}});
            const auto out = be->batched_qr(std::vector<ComplexMatrix>{a});
            CHECK(std::abs(std::abs(out[0].factor.r(0, 0)) - 3.5) <= 1e-14);
            CHECK(std::abs(std::abs(out[0].factor.r(1, 1)) - 1.9315453261414228) <= 1e-14);
            CHECK(out[0].factor.min_abs_diag == doctest::Approx(1.9315453261414228).epsilon(1e-14));
        }
    }
}

TEST_CASE("batched QR reconstruction, unitarity and rank detection") {
    std::mt19937_64 rng(11);
    std::vector<ComplexMatrix> batch;
    for (int i = 0; i < 32; ++i) batch.push_back(random_matrix(rng, 6, 4));
    ComplexMatrix deficient = random_matrix(rng, 6, 4);
    for (std::size_t r = 0; r < 6; ++r) deficient(r, 2) = 2.0 * deficient(r, 0) - Complex(0, 1) * deficient(r, 1);
    batch.push_back(deficient);

    for (const auto& be : all_backends()) {
        CAPTURE(be->name());
        const auto out = be->batched_qr(batch);
        REQUIRE(out.size() == batch.size());
        for (std::size_t e = 0; e + 1 < batch.size(); ++e) {
            REQUIRE(out[e].ok());
            CHECK(rel_diff(reconstruct(out[e].factor), batch[e]) <= 1e-12);
            CHECK(unitarity_error(out[e].factor.q) <= 1e-12);
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = 0; j < i; ++j) CHECK(out[e].factor.r(i, j) == Complex(0.0));
        }
        REQUIRE_FALSE(out.back().ok());
        CHECK(*out.back().rank_deficient_column == 2);

        // Serial and partitioned runs agree exactly, in order.
        const auto threaded = be->batched_qr(batch, QrOptions{-1.0, 4});
        for (std::size_t e = 0; e < batch.size(); ++e) {
            CHECK(threaded[e].factor.q == out[e].factor.q);
            CHECK(threaded[e].factor.r == out[e].factor.r);
        }
    }
}

TEST_CASE("backends agree on QR factors up to column phases") {
    std::mt19937_64 rng(12);
    std::vector<ComplexMatrix> batch;
    for (int i = 0; i < 8; ++i) batch.push_back(random_matrix(rng, 9, 7));
    const auto ref = make_backend("reference")->batched_qr(batch);
    for (const auto& be : all_backends()) {
        CAPTURE(be->name());
        const auto out = be->batched_qr(batch);
        for (std::size_t e = 0; e < batch.size(); ++e)
            for (std::size_t i = 0; i < 7; ++i)
                CHECK(std::abs(std::abs(out[e].factor.r(i, i)) - std::abs(ref[e].factor.r(i, i))) <=
                      1e-12 * std::abs(ref[e].factor.r(i, i)));
    }
}
