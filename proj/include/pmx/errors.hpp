#pragma once

#include <stdexcept>
#include <string>

namespace pmx {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Evaluation requested at (or within tolerance of) a pole.
class PoleError : public Error {
public:
    explicit PoleError(const std::string& msg) : Error(msg) {}
};

/// A series or iteration hit its cap before reaching tolerance.
class NonConvergenceError : public Error {
public:
    explicit NonConvergenceError(const std::string& msg) : Error(msg) {}
};

/// Quadrature error estimate exceeds tolerance after maximum refinement.
class QuadratureError : public Error {
public:
    explicit QuadratureError(const std::string& msg) : Error(msg) {}
};

/// Argument outside the supported domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Two contours violate the minimum separation required for 1/(u-t).
class SeparationError : public Error {
public:
    explicit SeparationError(const std::string& msg) : Error(msg) {}
};

/// A result left the representable range of double.
class OverflowError : public Error {
public:
    explicit OverflowError(const std::string& msg) : Error(msg) {}
};

/// A computed quantity violates a structural requirement (rank, sign, ...).
class NumericalRankError : public Error {
public:
    explicit NumericalRankError(const std::string& msg) : Error(msg) {}
};

/// Sign of a determinant came out wrong where positivity is required.
class SignError : public Error {
public:
    explicit SignError(const std::string& msg) : Error(msg) {}
};

/// Bad or inconsistent run configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Filesystem failure while writing or reading run outputs.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace pmx
