#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>

namespace phg {

/// Base of every error raised by the library. `kind()` is a stable tag used by
/// the CLI and the Python bindings.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error("ShapeError", what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error("ParseError", what + " (line " + std::to_string(line) + ", column " +
                                  std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class DuplicateMonomial : public Error {
public:
    explicit DuplicateMonomial(const std::string& what) : Error("DuplicateMonomial", what) {}
};

class EmptySupport : public Error {
public:
    explicit EmptySupport(const std::string& what) : Error("EmptySupport", what) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error("UsageError", what) {}
};

class ZeroCoordinate : public Error {
public:
    ZeroCoordinate(std::size_t point, std::size_t coordinate)
        : Error("ZeroCoordinate", "point " + std::to_string(point) + " has a zero coordinate at index " +
                                      std::to_string(coordinate)),
          point_(point),
          coordinate_(coordinate) {}

    std::size_t point() const noexcept { return point_; }
    std::size_t coordinate() const noexcept { return coordinate_; }

private:
    std::size_t point_;
    std::size_t coordinate_;
};

class MonomialOverflow : public Error {
public:
    explicit MonomialOverflow(std::size_t point)
        : Error("MonomialOverflow", "monomial values overflow at point " + std::to_string(point)),
          point_(point) {}

    std::size_t point() const noexcept { return point_; }

private:
    std::size_t point_;
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(std::size_t column)
        : Error("RankDeficient", "matrix is rank deficient at column " + std::to_string(column)),
          column_(column) {}

    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class SingularJacobian : public Error {
public:
    explicit SingularJacobian(std::size_t point)
        : Error("SingularJacobian", "singular Jacobian at point " + std::to_string(point)),
          point_(point) {}

    std::size_t point() const noexcept { return point_; }

private:
    std::size_t point_;
};

class DegenerateTangent : public Error {
public:
    explicit DegenerateTangent(std::size_t point)
        : Error("DegenerateTangent", "degenerate tangent space at point " + std::to_string(point)),
          point_(point) {}

    std::size_t point() const noexcept { return point_; }

private:
    std::size_t point_;
};

class StartPointInvalid : public Error {
public:
    StartPointInvalid(std::size_t worst_point, double residual)
        : Error("StartPointInvalid", "start point " + std::to_string(worst_point) +
                                         " is not on the path (residual " + std::to_string(residual) + ")"),
          worst_point_(worst_point),
          residual_(residual) {}

    std::size_t worst_point() const noexcept { return worst_point_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t worst_point_;
    double residual_;
};

/// Wraps an error raised while processing one sub-batch of a batched call.
/// `kind()` is the kind of the wrapped error; `rethrow_inner()` recovers its type.
class SubBatchError : public Error {
public:
    SubBatchError(std::size_t sub_batch, const Error& inner, std::exception_ptr inner_ptr)
        : Error(inner.kind(), "sub-batch " + std::to_string(sub_batch) + ": " + inner.what()),
          sub_batch_(sub_batch),
          inner_(std::move(inner_ptr)) {}

    std::size_t sub_batch() const noexcept { return sub_batch_; }
    [[noreturn]] void rethrow_inner() const { std::rethrow_exception(inner_); }

private:
    std::size_t sub_batch_;
    std::exception_ptr inner_;
};

}  // namespace phg
