#pragma once

#include <stdexcept>
#include <string>

namespace scto {

// Configuration problems: unknown names, inconsistent resolutions, missing blocks.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// The model left the regime where the operators are well defined
// (e.g. the mean-field displacement breaks the diffeomorphism condition).
struct RegimeError : std::runtime_error {
    explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative procedure failed to reach its tolerance.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
    double residual = 0.0;
    NumericalError(const std::string& what, double res)
        : std::runtime_error(what), residual(res) {}
};

// Fixed-point iteration observed sustained expansion (coupling too strong).
struct NonContractionError : NumericalError {
    using NumericalError::NumericalError;
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

inline double wrap_unit(double x) {
    double r = x - static_cast<long long>(x);
    if (r < 0.0) r += 1.0;
    if (r >= 1.0) r -= 1.0;  // guard against -1e-17 + 1.0 == 1.0
    return r;
}

// distance on the circle R/Z
inline double circle_dist(double a, double b) {
    double d = wrap_unit(a - b);
    return d <= 0.5 ? d : 1.0 - d;
}

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace scto
