#include "phg/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "json_locate.hpp"
#include "monomial.hpp"

namespace phg {

using nlohmann::json;

Rational::Rational(std::int64_t numerator, std::int64_t denominator) : num(numerator), den(denominator) {
    if (den <= 0) throw Error("InvalidLifting", "lifting denominator must be positive");
    if (num < 0) throw Error("InvalidLifting", "lifting values must be nonnegative");
    const std::int64_t g = std::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

bool graded_lex_less(const Exponent& a, const Exponent& b) {
    const long da = std::accumulate(a.begin(), a.end(), 0L);
    const long db = std::accumulate(b.begin(), b.end(), 0L);
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

namespace {

std::string exponent_to_string(const Exponent& e) {
    std::string s = "[";
    for (std::size_t i = 0; i < e.size(); ++i) s += (i ? "," : "") + std::to_string(e[i]);
    return s + "]";
}

}  // namespace

// ---------------------------------------------------------------------------
// LaurentSystem

LaurentSystem::LaurentSystem(std::vector<Exponent> support, ComplexMatrix coefficients, std::vector<Rational> lifting)
    : support_(std::move(support)), coefficients_(std::move(coefficients)), lifting_(std::move(lifting)) {
    if (support_.empty()) throw EmptySupport("system has no monomials");
    const std::size_t n = coefficients_.rows();
    if (n == 0) throw ShapeError("system has no equations");
    if (coefficients_.cols() != support_.size()) {
        throw ShapeError("coefficient matrix has " + std::to_string(coefficients_.cols()) + " columns but support has " +
                         std::to_string(support_.size()) + " monomials");
    }
    if (lifting_.size() != support_.size()) {
        throw ShapeError("lifting has " + std::to_string(lifting_.size()) + " values but support has " +
                         std::to_string(support_.size()) + " monomials");
    }
    for (std::size_t i = 0; i < support_.size(); ++i) {
        if (support_[i].size() != n) {
            throw ShapeError("support column " + std::to_string(i) + " has length " +
                             std::to_string(support_[i].size()) + ", expected " + std::to_string(n));
        }
    }
    std::set<Exponent> seen;
    for (const auto& a : support_) {
        if (!seen.insert(a).second) throw DuplicateMonomial("duplicate monomial " + exponent_to_string(a));
    }
    if (!coefficients_.all_finite()) throw ShapeError("coefficients must be finite");
    for (std::size_t k = 0; k < n; ++k) {
        const auto row = coefficients_.row(k);
        if (std::all_of(row.begin(), row.end(), [](const Complex& c) { return c == Complex(0.0); }))
            throw ShapeError("equation " + std::to_string(k) + " has only zero coefficients");
    }
}

std::vector<double> LaurentSystem::lifting_values() const {
    std::vector<double> out(lifting_.size());
    std::transform(lifting_.begin(), lifting_.end(), out.begin(), [](const Rational& r) { return r.value(); });
    return out;
}

LaurentSystem LaurentSystem::with_coefficients(ComplexMatrix coefficients) const {
    return LaurentSystem(support_, std::move(coefficients), lifting_);
}

LaurentSystem LaurentSystem::with_lifting(std::vector<Rational> lifting) const {
    return LaurentSystem(support_, coefficients_, std::move(lifting));
}

std::vector<Complex> LaurentSystem::evaluate(std::span<const Complex> x, double tau) const {
    if (x.size() != n()) throw ShapeError("evaluate: point has wrong length");
    std::vector<Complex> out(n());
    for (std::size_t i = 0; i < m(); ++i) {
        Complex term = std::exp(tau * lifting_[i].value());
        for (std::size_t j = 0; j < n(); ++j) term *= detail::ipow(x[j], support_[i][j]);
        for (std::size_t k = 0; k < n(); ++k) out[k] += coefficients_(k, i) * term;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Construction

std::vector<Rational> random_lifting(std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> numerator(1, 1000);
    std::vector<Rational> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) out.emplace_back(numerator(rng), 1000);
    return out;
}

LaurentSystem unmix(const std::vector<std::vector<Exponent>>& supports,
                    const std::vector<std::vector<Complex>>& coefficients, std::optional<std::vector<Rational>> lifting,
                    std::uint64_t lifting_seed) {
    const std::size_t n = supports.size();
    if (coefficients.size() != n) throw ShapeError("unmix: support and coefficient lists differ in length");

    std::vector<Exponent> all;
    for (std::size_t k = 0; k < n; ++k) {
        if (supports[k].size() != coefficients[k].size())
            throw ShapeError("unmix: equation " + std::to_string(k) + " has mismatched support and coefficients");
        for (const auto& a : supports[k]) {
            if (a.size() != n)
                throw ShapeError("unmix: exponent " + exponent_to_string(a) + " does not have length " +
                                 std::to_string(n));
            all.push_back(a);
        }
    }
    if (all.empty()) throw EmptySupport("unmix: union of supports is empty");
    std::sort(all.begin(), all.end(), graded_lex_less);
    all.erase(std::unique(all.begin(), all.end()), all.end());

    std::map<Exponent, std::size_t> index;
    for (std::size_t i = 0; i < all.size(); ++i) index.emplace(all[i], i);

    ComplexMatrix c(n, all.size());
    for (std::size_t k = 0; k < n; ++k) {
        std::set<Exponent> seen;
        for (std::size_t t = 0; t < supports[k].size(); ++t) {
            if (!seen.insert(supports[k][t]).second)
                throw DuplicateMonomial("unmix: equation " + std::to_string(k) + " lists " +
                                        exponent_to_string(supports[k][t]) + " twice");
            c(k, index.at(supports[k][t])) = coefficients[k][t];
        }
    }
    std::vector<Rational> w = lifting ? std::move(*lifting) : random_lifting(all.size(), lifting_seed);
    return LaurentSystem(std::move(all), std::move(c), std::move(w));
}

HomogenizedSystem homogenize(const LaurentSystem& sys) {
    HomogenizedSystem h{sys, 0, {}};
    std::vector<int> sums;
    sums.reserve(sys.m());
    for (const auto& a : sys.support()) sums.push_back(std::accumulate(a.begin(), a.end(), 0));
    h.degree = *std::max_element(sums.begin(), sums.end());
    h.hom_support.reserve(sys.m());
    for (std::size_t i = 0; i < sys.m(); ++i) {
        Exponent e = sys.support()[i];
        e.push_back(h.degree - sums[i]);
        h.hom_support.push_back(std::move(e));
    }
    return h;
}

HomotopyTables build_tables(const HomogenizedSystem& hsys) {
    const std::size_t n = hsys.n();
    const std::size_t N = hsys.N();
    const std::size_t m = hsys.m();
    const auto lifting = hsys.base.lifting_values();
    const auto& c = hsys.base.coefficients();

    HomotopyTables t;
    t.equation_count = n;
    t.variable_count = N;
    t.monomial_count = m;
    t.degree = hsys.degree;

    t.a_hat = ComplexMatrix(N + 1, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t r = 0; r < N; ++r) t.a_hat(r, i) = static_cast<double>(hsys.hom_support[i][r]);
        t.a_hat(N, i) = lifting[i];
    }

    t.b.reserve(n);
    t.b_concat = ComplexMatrix(m, n * (N + 2));
    for (std::size_t k = 0; k < n; ++k) {
        ComplexMatrix bk(N + 2, m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t r = 0; r <= N; ++r) bk(r, i) = c(k, i) * t.a_hat(r, i);
            bk(N + 1, i) = c(k, i);
            for (std::size_t r = 0; r < N + 2; ++r) t.b_concat(i, k * (N + 2) + r) = bk(r, i);
        }
        t.b.push_back(std::move(bk));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Generators

namespace {

std::optional<std::vector<Rational>> lifting_override(const LiftingSource& source) { return source.values; }

}  // namespace

LaurentSystem gen_cyclic(int n, const LiftingSource& lifting) {
    if (n < 3) throw UsageError("cyclic-n requires n >= 3");
    const auto un = static_cast<std::size_t>(n);
    std::vector<std::vector<Exponent>> supports(un);
    std::vector<std::vector<Complex>> coeffs(un);
    for (std::size_t k = 1; k < un; ++k) {
        for (std::size_t start = 0; start < un; ++start) {
            Exponent e(un, 0);
            for (std::size_t j = 0; j < k; ++j) e[(start + j) % un] += 1;
            supports[k - 1].push_back(std::move(e));
            coeffs[k - 1].emplace_back(1.0);
        }
    }
    supports[un - 1] = {Exponent(un, 1), Exponent(un, 0)};
    coeffs[un - 1] = {1.0, -1.0};
    return unmix(supports, coeffs, lifting_override(lifting), lifting.seed);
}

LaurentSystem gen_chandra(int n, double c, const LiftingSource& lifting) {
    if (n < 2) throw UsageError("chandra-n requires n >= 2");
    const auto un = static_cast<std::size_t>(n);
    std::vector<std::vector<Exponent>> supports(un);
    std::vector<std::vector<Complex>> coeffs(un);
    for (std::size_t k = 1; k <= un; ++k) {
        auto& s = supports[k - 1];
        auto& cf = coeffs[k - 1];
        Exponent lin(un, 0);
        lin[k - 1] = 1;
        s.push_back(lin);
        cf.emplace_back(2.0 * n);
        for (std::size_t j = 1; j < un; ++j) {
            Exponent q(un, 0);
            q[k - 1] += 1;
            q[j - 1] += 1;
            s.push_back(std::move(q));
            cf.emplace_back(-c * static_cast<double>(k) / static_cast<double>(k + j));
        }
        s.push_back(Exponent(un, 0));
        cf.emplace_back(-2.0 * n);
    }
    return unmix(supports, coeffs, lifting_override(lifting), lifting.seed);
}

LaurentSystem gen_random(const RandomSystemOptions& o) {
    if (o.n < 1 || o.m < 1) throw UsageError("random system needs n >= 1 and m >= 1");
    if (o.min_exponent > o.max_exponent) throw UsageError("random system: empty exponent range");
    const double span = static_cast<double>(o.max_exponent - o.min_exponent + 1);
    if (std::pow(span, o.n) < static_cast<double>(o.m))
        throw UsageError("random system: exponent range too small for " + std::to_string(o.m) + " monomials");

    std::mt19937_64 rng(o.seed);
    std::uniform_int_distribution<int> exponent(o.min_exponent, o.max_exponent);
    std::set<Exponent, decltype(&graded_lex_less)> drawn(&graded_lex_less);
    while (drawn.size() < static_cast<std::size_t>(o.m)) {
        Exponent e(static_cast<std::size_t>(o.n));
        for (auto& v : e) v = exponent(rng);
        drawn.insert(std::move(e));
    }
    std::vector<Exponent> support(drawn.begin(), drawn.end());

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ComplexMatrix c(static_cast<std::size_t>(o.n), support.size());
    for (auto& v : c.values()) v = std::polar(std::sqrt(unit(rng)), 2.0 * std::numbers::pi * unit(rng));

    std::uniform_int_distribution<std::int64_t> numerator(0, static_cast<std::int64_t>(std::llround(1000 * o.max_lifting)));
    std::vector<Rational> lifting;
    for (std::size_t i = 0; i < support.size(); ++i) lifting.emplace_back(numerator(rng), 1000);
    return LaurentSystem(std::move(support), std::move(c), std::move(lifting));
}

LaurentSystem adjust_for_start_point(const LaurentSystem& sys, std::span<const Complex> point, double tau) {
    std::vector<Complex> y(point.begin(), point.end());
    if (y.size() == sys.n()) y.emplace_back(1.0);
    if (y.size() != sys.n() + 1)
        throw ShapeError("start point has length " + std::to_string(point.size()) + ", expected " +
                         std::to_string(sys.n() + 1));

    const HomogenizedSystem h = homogenize(sys);
    const auto omega = sys.lifting_values();
    std::vector<Complex> term(sys.m());
    for (std::size_t i = 0; i < sys.m(); ++i) {
        Complex t = std::exp(tau * omega[i]);
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j] == Complex(0.0) && h.hom_support[i][j] < 0) throw ZeroCoordinate(0, j);
            t *= detail::ipow(y[j], h.hom_support[i][j]);
        }
        term[i] = t;
    }

    ComplexMatrix c = sys.coefficients();
    for (std::size_t k = 0; k < sys.n(); ++k) {
        std::size_t pick = sys.m();
        for (std::size_t i = 0; i < sys.m(); ++i) {
            if (c(k, i) == Complex(0.0)) continue;
            if (pick == sys.m() || std::abs(term[i]) > std::abs(term[pick])) pick = i;
        }
        Complex rest = 0.0;
        for (std::size_t i = 0; i < sys.m(); ++i)
            if (i != pick) rest += c(k, i) * term[i];
        c(k, pick) = -rest / term[pick];
    }
    return sys.with_coefficients(std::move(c));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

class SystemReader {
public:
    explicit SystemReader(std::string_view text) : text_(text) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
        detail::JsonLocator locator(text_);
        const auto pos = detail::position_of_offset(text_, locator.locate(path));
        std::string where;
        for (const auto& p : path) where += "/" + p;
        throw ParseError(what + " at " + (where.empty() ? "/" : where), pos.line, pos.column);
    }

    const json& field(const json& doc, const std::string& key) const {
        if (!doc.contains(key)) fail({}, "missing field '" + key + "'");
        return doc.at(key);
    }

    const json& array(const json& v, const std::vector<std::string>& path) const {
        if (!v.is_array()) fail(path, "expected an array");
        return v;
    }

    long long integer(const json& v, const std::vector<std::string>& path) const {
        if (!v.is_number_integer()) fail(path, "expected an integer");
        return v.get<long long>();
    }

    double number(const json& v, const std::vector<std::string>& path) const {
        if (!v.is_number()) fail(path, "expected a number");
        return v.get<double>();
    }

    LaurentSystem read() const {
        json doc;
        try {
            doc = json::parse(text_);
        } catch (const json::parse_error& e) {
            const auto pos = detail::position_of_offset(text_, e.byte == 0 ? 0 : e.byte - 1);
            std::string msg = e.what();
            throw ParseError("malformed JSON: " + msg, pos.line, pos.column);
        }
        if (!doc.is_object()) fail({}, "expected a JSON object");

        const long long n_raw = integer(field(doc, "n"), {"n"});
        if (n_raw < 1) fail({"n"}, "n must be positive");
        const auto n = static_cast<std::size_t>(n_raw);

        const json& sup = array(field(doc, "support"), {"support"});
        std::vector<Exponent> support;
        for (std::size_t i = 0; i < sup.size(); ++i) {
            const std::vector<std::string> p{"support", std::to_string(i)};
            const json& col = array(sup[i], p);
            if (col.size() != n)
                throw ShapeError("support column " + std::to_string(i) + " has length " + std::to_string(col.size()) +
                                 ", expected n = " + std::to_string(n));
            Exponent e;
            for (std::size_t j = 0; j < col.size(); ++j) {
                const long long v = integer(col[j], {"support", std::to_string(i), std::to_string(j)});
                if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
                    fail({"support", std::to_string(i), std::to_string(j)}, "exponent out of range");
                e.push_back(static_cast<int>(v));
            }
            support.push_back(std::move(e));
        }
        const std::size_t m = support.size();

        const json& cf = array(field(doc, "coefficients"), {"coefficients"});
        if (cf.size() != n)
            throw ShapeError("coefficients have " + std::to_string(cf.size()) + " rows, expected n = " +
                             std::to_string(n));
        ComplexMatrix c(n, m);
        for (std::size_t k = 0; k < n; ++k) {
            const json& row = array(cf[k], {"coefficients", std::to_string(k)});
            if (row.size() != m)
                throw ShapeError("coefficient row " + std::to_string(k) + " has " + std::to_string(row.size()) +
                                 " entries but support has " + std::to_string(m) + " monomials");
            for (std::size_t i = 0; i < m; ++i) {
                const std::vector<std::string> p{"coefficients", std::to_string(k), std::to_string(i)};
                const json& pair = array(row[i], p);
                if (pair.size() != 2) fail(p, "expected a [re, im] pair");
                c(k, i) = Complex(number(pair[0], {p[0], p[1], p[2], "0"}), number(pair[1], {p[0], p[1], p[2], "1"}));
            }
        }

        const json& lf = array(field(doc, "lifting"), {"lifting"});
        if (lf.size() != m)
            throw ShapeError("lifting has " + std::to_string(lf.size()) + " values but support has " +
                             std::to_string(m) + " monomials");
        std::vector<Rational> lifting;
        for (std::size_t i = 0; i < m; ++i) {
            const std::vector<std::string> p{"lifting", std::to_string(i)};
            const json& pair = array(lf[i], p);
            if (pair.size() != 2) fail(p, "expected a [num, den] pair");
            const long long num = integer(pair[0], {"lifting", std::to_string(i), "0"});
            const long long den = integer(pair[1], {"lifting", std::to_string(i), "1"});
            if (den <= 0 || num < 0) fail(p, "lifting must be a nonnegative rational with positive denominator");
            lifting.emplace_back(num, den);
        }
        return LaurentSystem(std::move(support), std::move(c), std::move(lifting));
    }

private:
    std::string_view text_;
};

}  // namespace

LaurentSystem parse_system(std::string_view text) { return SystemReader(text).read(); }

std::string serialize_system(const LaurentSystem& sys) {
    std::ostringstream os;
    os << "{\n  \"n\": " << sys.n() << ",\n  \"support\": [";
    for (std::size_t i = 0; i < sys.m(); ++i) os << (i ? ",\n    " : "\n    ") << json(sys.support()[i]).dump();
    os << "\n  ],\n  \"coefficients\": [";
    for (std::size_t k = 0; k < sys.n(); ++k) {
        json row = json::array();
        for (const auto& v : sys.coefficients().row(k)) row.push_back({v.real(), v.imag()});
        os << (k ? ",\n    " : "\n    ") << row.dump();
    }
    os << "\n  ],\n  \"lifting\": [";
    for (std::size_t i = 0; i < sys.m(); ++i)
        os << (i ? ", " : "") << "[" << sys.lifting()[i].num << ", " << sys.lifting()[i].den << "]";
    os << "]\n}\n";
    return os.str();
}

}  // namespace phg
