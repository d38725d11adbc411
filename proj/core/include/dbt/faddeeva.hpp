#pragma once

#include <complex>

namespace dbt {

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
///
/// Region-switched evaluation (truncated Taylor series near the origin, a
/// pole-shifted downward recursion at intermediate radius, the Laplace
/// continued fraction far out) with relative accuracy around 1e-13 in the
/// upper half plane; all four quadrants are supported through the usual
/// reflection identities. Throws DomainError on NaN input and NumericalError
/// where 2 exp(-z^2) overflows in the lower half plane.
std::complex<double> faddeeva(std::complex<double> z);

}  // namespace dbt
