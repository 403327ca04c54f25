#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lsam {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr std::string_view kVersion = "0.3.0";

// Error hierarchy. Every failure the library reports derives from Error so
// the CLI can map it to a single exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: a field outside its documented domain.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A configuration the operation does not cover (e.g. general beta for d > 1).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Raised when an iterate's squared error exceeds the divergence guard.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::int64_t first_step)
      : Error("iterates diverged at step " + std::to_string(first_step)),
        first_step_(first_step) {}
  std::int64_t first_step() const noexcept { return first_step_; }

 private:
  std::int64_t first_step_;
};

inline constexpr double kDivergenceThreshold = 1e100;

enum class Method { sgd, shb, asg, generic };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::sgd: return "sgd";
    case Method::shb: return "shb";
    case Method::asg: return "asg";
    case Method::generic: return "generic";
  }
  return "generic";
}

inline Method parse_method(std::string_view s) {
  if (s == "sgd") return Method::sgd;
  if (s == "shb") return Method::shb;
  if (s == "asg") return Method::asg;
  if (s == "generic") return Method::generic;
  throw ValidationError("method", "unknown method '" + std::string(s) + "'");
}

/// Step size alpha, Nesterov mixing beta, momentum eta.
struct MethodParams {
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  Method method = Method::generic;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw ValidationError("alpha", "must be a positive finite real");
    if (!(beta >= 0.0 && beta <= 1.0))
      throw ValidationError("beta", "must lie in [0, 1]");
    if (!(eta >= 0.0 && eta <= 1.0))
      throw ValidationError("eta", "must lie in [0, 1]");
  }

  /// Momentum of the equivalent beta = 0 scalar recursion for eigenvalue
  /// `lambda`: eta * (1 - alpha * beta * lambda).
  double reduced_eta(double lambda) const {
    return eta * (1.0 - alpha * beta * lambda);
  }
};

inline MethodParams make_params(double alpha, double beta, double eta,
                                Method m = Method::generic) {
  MethodParams p{alpha, beta, eta, m};
  p.validate();
  return p;
}

/// How the previous iterate is initialised at step 0.
enum class InitConvention {
  zero_velocity,  // x_{-1} = x_0
  legacy,         // x_{-1} - x* = 0
};

}  // namespace lsam
