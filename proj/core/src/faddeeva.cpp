#include "dbt/faddeeva.hpp"

#include <cmath>

#include "dbt/errors.hpp"

namespace dbt {

namespace {

constexpr double kTwoOverSqrtPi = 1.12837916709551257388;
constexpr double kMaxReal = 0.5e154;        // sqrt of largest double
constexpr double kMaxExp = 708.503061461606;  // ln(max/2)
constexpr double kMaxGoni = 3.53711887601422e15;

int nearest_int(double x) { return static_cast<int>(std::lround(x)); }

}  // namespace

std::complex<double> faddeeva(std::complex<double> z) {
    const double xi = z.real();
    const double yi = z.imag();
    if (std::isnan(xi) || std::isnan(yi)) {
        throw DomainError("faddeeva: NaN argument");
    }

    const double xabs = std::abs(xi);
    const double yabs = std::abs(yi);
    if (xabs > kMaxReal || yabs > kMaxReal) {
        throw NumericalError("faddeeva: |z| too large, z^2 overflows");
    }

    const double x = xabs / 6.3;
    const double y = yabs / 4.4;
    double qrho = x * x + y * y;

    const double xquad_up = xabs * xabs - yabs * yabs;
    const double yquad = 2.0 * xabs * yabs;

    double u = 0.0;
    double v = 0.0;
    double u2 = 0.0;
    double v2 = 0.0;

    const bool series = qrho < 0.085264;
    if (series) {
        // Taylor series of z*w(z) truncated at a radius-dependent order,
        // combined with exp(-z^2) evaluated directly.
        qrho = (1.0 - 0.85 * y) * std::sqrt(qrho);
        const int n = nearest_int(6.0 + 72.0 * qrho);
        int j = 2 * n + 1;
        double xsum = 1.0 / j;
        double ysum = 0.0;
        for (int i = n; i >= 1; --i) {
            j -= 2;
            const double xaux = (xsum * xquad_up - ysum * yquad) / i;
            ysum = (xsum * yquad + ysum * xquad_up) / i;
            xsum = xaux + 1.0 / j;
        }
        const double u1 = -kTwoOverSqrtPi * (xsum * yabs + ysum * xabs) + 1.0;
        const double v1 = kTwoOverSqrtPi * (xsum * xabs - ysum * yabs);
        const double daux = std::exp(-xquad_up);
        u2 = daux * std::cos(yquad);
        v2 = -daux * std::sin(yquad);
        u = u1 * u2 - v1 * v2;
        v = u1 * v2 + v1 * u2;
    } else {
        double h = 0.0;
        double h2 = 0.0;
        double qlambda = 0.0;
        int kapn = 0;
        int nu = 0;
        if (qrho > 1.0) {
            // Laplace continued fraction, evaluated by downward recursion.
            qrho = std::sqrt(qrho);
            nu = static_cast<int>(3.0 + 1442.0 / (26.0 * qrho + 77.0));
        } else {
            // Intermediate region: same recursion started from a shifted
            // point z + ih to keep it stable, then walked back down.
            qrho = (1.0 - y) * std::sqrt(1.0 - qrho);
            h = 1.88 * qrho;
            h2 = 2.0 * h;
            kapn = nearest_int(7.0 + 34.0 * qrho);
            nu = nearest_int(16.0 + 26.0 * qrho);
        }
        const bool shifted = h > 0.0;
        if (shifted) qlambda = std::pow(h2, kapn);

        double rx = 0.0;
        double ry = 0.0;
        double sx = 0.0;
        double sy = 0.0;
        for (int n = nu; n >= 0; --n) {
            const double np1 = n + 1.0;
            const double tx = yabs + h + np1 * rx;
            const double ty = xabs - np1 * ry;
            const double c = 0.5 / (tx * tx + ty * ty);
            rx = c * tx;
            ry = c * ty;
            if (shifted && n <= kapn) {
                const double tx2 = qlambda + sx;
                sx = rx * tx2 - ry * sy;
                sy = ry * tx2 + rx * sy;
                qlambda /= h2;
            }
        }
        if (!shifted) {
            u = kTwoOverSqrtPi * rx;
            v = kTwoOverSqrtPi * ry;
        } else {
            u = kTwoOverSqrtPi * sx;
            v = kTwoOverSqrtPi * sy;
        }
        if (yabs == 0.0) u = std::exp(-xabs * xabs);
    }

    // Map the first-quadrant value back to the requested quadrant:
    // w(-conj(z)) = conj(w(z)) and w(z) = 2 exp(-z^2) - w(-z).
    if (yi < 0.0) {
        if (series) {
            u2 *= 2.0;
            v2 *= 2.0;
        } else {
            const double xquad_down = -xquad_up;
            if (yquad > kMaxGoni || xquad_down > kMaxExp) {
                throw NumericalError(
                    "faddeeva: 2*exp(-z^2) overflows for Im(z) < 0");
            }
            const double w1 = 2.0 * std::exp(xquad_down);
            u2 = w1 * std::cos(yquad);
            v2 = -w1 * std::sin(yquad);
        }
        u = u2 - u;
        v = v2 - v;
        if (xi > 0.0) v = -v;
    } else {
        if (xi < 0.0) v = -v;
    }
    return {u, v};
}

}  // namespace dbt
