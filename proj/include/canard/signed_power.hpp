#pragma once

#include <cmath>

#include "error.hpp"

namespace canard {

// x^[p] = |x|^p sgn(x), evaluated as exp(p ln|x|)
inline double signed_pow(double x, double p)
{
    if (x == 0.0) {
        if (p > 0.0)
            return 0.0;
        throw DomainError("signed_pow: zero base with non-positive exponent");
    }
    double m = std::exp(p * std::log(std::fabs(x)));
    return x < 0.0 ? -m : m;
}

// |x|^p, same log-space evaluation
inline double abs_pow(double x, double p)
{
    if (x == 0.0) {
        if (p > 0.0)
            return 0.0;
        throw DomainError("abs_pow: zero base with non-positive exponent");
    }
    return std::exp(p * std::log(std::fabs(x)));
}

inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace canard
