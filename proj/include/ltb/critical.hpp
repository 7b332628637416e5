#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ltb/certificate.hpp"
#include "ltb/luminosity.hpp"
#include "ltb/numerics.hpp"

namespace ltb {

struct NoCriticalPoint : std::domain_error {
    NoCriticalPoint() : std::domain_error("no critical point: R_z > 0 everywhere for omega_lambda = 1") {}
};

struct CriticalPoint {
    double omega_lambda;
    double z_lambda;
    double residual; // N(z_lambda), N the R_z numerator
};

struct ZLambdaBounds {
    double lower = 0.0; // on z_lambda + 1, filled by verify_zlambda_bounds
    double upper = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
};

// Root of N(z) = (1+z) I(1+z) - int_1^{1+z} I. N is strictly decreasing with a unique
// positive root for omega_lambda < 1; the bracket [1,2] is expanded by doubling
// (z_lambda diverges as omega_lambda -> 1), capped at 1e9.
inline CriticalPoint find_z_lambda(const CosmoParams& p, double tol = 1e-12,
                                   const QuadratureSpec& quad = {1e-14, 1e-12, 60}) {
    p.validate();
    if (p.omega_lambda == 1.0) throw NoCriticalPoint();
    LuminosityCurve curve(p, quad);
    const auto N = [&](double z) { return curve.rz_numerator(z); };
    auto [lo, hi] = expand_bracket_right(N, 1.0, 2.0, 1e9);
    const double z = find_root_bracketed(N, lo, hi, tol);
    return {p.omega_lambda, z, N(z)};
}

// Proof constants for the z_lambda bounds:
//   k1(omega) = (4/3) int_1^{2.25} I(y) K(y, 2.25) dy,  K(y,q) = I^2(q)(q^3-1) - I^2(y)(y^3-1)
//   1/k2     = int_1^{2.25} dy / sqrt(1+y^3)
// c1 is the infimum of k1 over the supplied omega grid (preserves the inequality
// direction on the grid), c2 = 2.25^4, c3 = k2^2.
inline ZLambdaBounds zlambda_bound_constants(const QuadratureSpec& quad = {1e-14, 1e-12, 60},
                                             const std::vector<double>& omega_grid = {
                                                 0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99}) {
    const double q = 2.25;
    double k1_min = std::numeric_limits<double>::infinity();
    for (double om : omega_grid) {
        const CosmoParams p{om};
        const double Iq = integrand(q, p);
        const auto f = [&](double y) {
            const double Iy = integrand(y, p);
            const double K = Iq * Iq * (q * q * q - 1.0) - Iy * Iy * (y * y * y - 1.0);
            return Iy * K;
        };
        const double k1 = (4.0 / 3.0) * integrate_adaptive(f, 1.0, q, quad);
        k1_min = std::min(k1_min, k1);
    }
    const double inv_k2 =
        integrate_adaptive([](double y) { return 1.0 / std::sqrt(1.0 + y * y * y); }, 1.0, q, quad);
    ZLambdaBounds b;
    b.c1 = k1_min;
    b.c2 = q * q * q * q;
    b.c3 = 1.0 / (inv_k2 * inv_k2);
    return b;
}

// Certificate for (c1 ln(1/(1-omega)) + c2)^{1/4} <= z_lambda + 1 <= c3/(1-omega).
inline BoundCertificate verify_zlambda_bounds(const CosmoParams& p, const CriticalPoint& cp,
                                              ZLambdaBounds bounds) {
    const double om = p.omega_lambda;
    bounds.lower = std::pow(bounds.c1 * std::log(1.0 / (1.0 - om)) + bounds.c2, 0.25);
    bounds.upper = bounds.c3 / (1.0 - om);
    const double q = cp.z_lambda + 1.0;

    BoundCertificate cert;
    cert.claim_id = ClaimId::zlambda_bounds;
    cert.z_lo = cert.z_hi = cp.z_lambda;
    cert.constants = {{"c1", bounds.c1}, {"c2", bounds.c2},   {"c3", bounds.c3},
                      {"lower", bounds.lower}, {"upper", bounds.upper}, {"z_lambda", cp.z_lambda}};
    cert.worst_margin = std::min(q - bounds.lower, bounds.upper - q);
    cert.verdict = cert.worst_margin >= -1e-12;
    return cert;
}

} // namespace ltb
