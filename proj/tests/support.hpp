#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "phg/directions.hpp"
#include "phg/eval.hpp"
#include "phg/kernels.hpp"
#include "phg/system.hpp"
#include "phg/tracker.hpp"

namespace phg::test {

inline Complex random_unit_disk(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return std::polar(std::sqrt(u(rng)), 2.0 * 3.141592653589793 * u(rng));
}

/// Complex number with modulus in [rmin, rmax] and uniform argument.
inline Complex random_annulus(std::mt19937_64& rng, double rmin, double rmax) {
    std::uniform_real_distribution<double> r(rmin, rmax), a(-3.141592653589793, 3.141592653589793);
    return std::polar(r(rng), a(rng));
}

inline ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> g;
    ComplexMatrix m(rows, cols);
    for (auto& v : m.values()) v = Complex(g(rng), g(rng));
    return m;
}

inline ComplexMatrix triple_loop(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            Complex s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

inline double rel_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    double num = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) num += std::norm(a.data()[k] - b.data()[k]);
    const double den = frobenius_norm(b);
    return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

inline PointBatch random_points(std::mt19937_64& rng, std::size_t p, std::size_t N, double rmin, double rmax,
                                double tau) {
    ComplexMatrix y(p, N);
    for (auto& v : y.values()) v = random_annulus(rng, rmin, rmax);
    return make_point_batch(std::move(y), std::vector<double>(p, tau));
}

/// h = y1 - e^tau y_h; the path is y1 / y_h = e^tau.
inline LaurentSystem exp_path_system() {
    ComplexMatrix c(1, 2, {Complex(1.0), Complex(-1.0)});
    return LaurentSystem({{1}, {0}}, c, {Rational(0), Rational(1)});
}

/// n = 1, support {x, 1}, coefficients (2, 3), lifting (1, 2).
inline LaurentSystem two_term_system() {
    ComplexMatrix c(1, 2, {Complex(2.0), Complex(3.0)});
    return LaurentSystem({{1}, {0}}, c, {Rational(1), Rational(2)});
}

/// Random system together with a seeded on-path start at tau0.
struct OnPathCase {
    LaurentSystem system;
    std::vector<Complex> start;  // homogeneous, last coordinate 1
};

inline OnPathCase on_path_case(int n, int m, std::uint64_t seed, double tau0) {
    RandomSystemOptions o;
    o.n = n;
    o.m = m;
    o.min_exponent = 0;
    o.max_exponent = 2;
    o.seed = seed;
    const LaurentSystem base = gen_random(o);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<Complex> y(static_cast<std::size_t>(n) + 1, 1.0);
    for (int j = 0; j < n; ++j) y[static_cast<std::size_t>(j)] = random_annulus(rng, 0.5, 1.5);
    return {adjust_for_start_point(base, y, tau0), y};
}

inline PointBatch single_point(std::span<const Complex> y, double tau) {
    ComplexMatrix m(1, y.size(), std::vector<Complex>(y.begin(), y.end()));
    return make_point_batch(std::move(m), {tau});
}

}  // namespace phg::test
