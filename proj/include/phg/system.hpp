#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phg/complex_matrix.hpp"

namespace phg {

/// Exact nonnegative rational lifting value.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t numerator, std::int64_t denominator = 1);

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};

/// Exponent vector of one monomial.
using Exponent = std::vector<int>;

/// Graded lexicographic order: total degree first, then lexicographic.
bool graded_lex_less(const Exponent& a, const Exponent& b);

/// Unmixed Laurent system: n equations sharing the support {a_1..a_m}, with an
/// n x m coefficient matrix and one lifting value per monomial. Immutable.
class LaurentSystem {
public:
    /// Validates the invariants; throws ShapeError, DuplicateMonomial or EmptySupport.
    LaurentSystem(std::vector<Exponent> support, ComplexMatrix coefficients, std::vector<Rational> lifting);

    std::size_t n() const noexcept { return coefficients_.rows(); }
    std::size_t m() const noexcept { return support_.size(); }

    const std::vector<Exponent>& support() const noexcept { return support_; }
    const ComplexMatrix& coefficients() const noexcept { return coefficients_; }
    const std::vector<Rational>& lifting() const noexcept { return lifting_; }
    std::vector<double> lifting_values() const;

    /// Returns a copy with different coefficients (same shape).
    LaurentSystem with_coefficients(ComplexMatrix coefficients) const;
    /// Returns a copy with different lifting values (same length).
    LaurentSystem with_lifting(std::vector<Rational> lifting) const;

    /// Affine value f_k(x) * exp(tau * omega) summed, i.e. h(x, tau), by direct expansion.
    std::vector<Complex> evaluate(std::span<const Complex> x, double tau = 0.0) const;

    bool operator==(const LaurentSystem&) const = default;

private:
    std::vector<Exponent> support_;
    ComplexMatrix coefficients_;
    std::vector<Rational> lifting_;
};

/// Homogenized system: every column of hom_support has total degree `degree`.
/// The homogenizing coordinate is the last one.
struct HomogenizedSystem {
    LaurentSystem base;
    int degree = 0;
    std::vector<Exponent> hom_support;

    std::size_t n() const noexcept { return base.n(); }
    std::size_t m() const noexcept { return base.m(); }
    std::size_t N() const noexcept { return base.n() + 1; }
    /// Per-equation degrees; all equal to the shared degree.
    std::vector<int> degrees() const { return std::vector<int>(base.n(), degree); }
};

/// Constant tables used by the batched evaluation.
struct HomotopyTables {
    std::size_t equation_count = 0;  // n
    std::size_t variable_count = 0;  // N = n + 1
    std::size_t monomial_count = 0;  // m
    int degree = 0;

    /// (N+1) x m: columns (hom exponent, lifting).
    ComplexMatrix a_hat;
    /// n tables, each (N+2) x m; column i of b[k] is c_{k,i} * (a_hat column i, 1).
    std::vector<ComplexMatrix> b;
    /// m x n(N+2) horizontal concatenation [b[0]^T ... b[n-1]^T].
    ComplexMatrix b_concat;

    std::size_t block_cols() const noexcept { return variable_count + 2; }
};

/// Mixed input: per-equation supports and matching coefficient lists.
LaurentSystem unmix(const std::vector<std::vector<Exponent>>& supports,
                    const std::vector<std::vector<Complex>>& coefficients,
                    std::optional<std::vector<Rational>> lifting = std::nullopt, std::uint64_t lifting_seed = 0);

HomogenizedSystem homogenize(const LaurentSystem& sys);

HomotopyTables build_tables(const HomogenizedSystem& hsys);

/// Default lifting: numerators uniform in [1, 1000] over denominator 1000.
std::vector<Rational> random_lifting(std::size_t m, std::uint64_t seed);

/// Where lifting values come from when a generator builds a system.
struct LiftingSource {
    std::uint64_t seed = 0;
    std::optional<std::vector<Rational>> values;
};

LaurentSystem gen_cyclic(int n, const LiftingSource& lifting = {});
LaurentSystem gen_chandra(int n, double c, const LiftingSource& lifting = {});

struct RandomSystemOptions {
    int n = 2;
    int m = 6;
    int min_exponent = 0;
    int max_exponent = 2;
    std::uint64_t seed = 0;
    /// Upper bound for lifting values (drawn as k/1000 with k in [0, 1000 * max_lifting]).
    double max_lifting = 1.0;
};

/// Dense random system: m distinct exponent vectors, coefficients uniform in the unit disk.
LaurentSystem gen_random(const RandomSystemOptions& options);

/// Adjusts one coefficient per equation so that h(y, tau) = 0 at the given
/// homogeneous point (length n+1, last coordinate homogenizing). The adjusted
/// coefficient is the nonzero one whose term has the largest modulus.
LaurentSystem adjust_for_start_point(const LaurentSystem& sys, std::span<const Complex> y, double tau);

/// JSON system document (see README for the schema).
LaurentSystem parse_system(std::string_view text);
std::string serialize_system(const LaurentSystem& sys);

}  // namespace phg
