#pragma once

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "ltb/numerics.hpp"

namespace ltb {

struct CosmoParams {
    double omega_lambda = 0.0; // dimensionless

    void validate() const {
        if (!(omega_lambda >= 0.0 && omega_lambda <= 1.0))
            throw std::invalid_argument("CosmoParams: omega_lambda must lie in [0,1]");
    }
};

// I(y) = 1/sqrt(Omega + (1-Omega) y^3), y >= 1
inline double integrand(double y, const CosmoParams& p) {
    return 1.0 / std::sqrt(p.omega_lambda + (1.0 - p.omega_lambda) * y * y * y);
}

inline double integrand_deriv(double y, const CosmoParams& p) {
    const double I = integrand(y, p);
    return -1.5 * (1.0 - p.omega_lambda) * y * y * I * I * I;
}

inline double integrand_deriv2(double y, const CosmoParams& p) {
    const double I = integrand(y, p);
    const double Ip = integrand_deriv(y, p);
    return -1.5 * (1.0 - p.omega_lambda) * (2.0 * y * I * I * I + 3.0 * y * y * I * I * Ip);
}

// Data side of the map: the shell radius R[z] = D_L/(1+z)^2 and its z-derivatives,
// all evaluated analytically except the single integral of I, which is cached in an
// expanding table of fixed-width panels so repeated right-hand-side evaluations reuse
// partial integrals. Panel values are independent of evaluation order, so concurrent
// readers (behind the lock) obtain identical values.
class LuminosityCurve {
public:
    explicit LuminosityCurve(CosmoParams params,
                             QuadratureSpec quad = {1e-14, 1e-12, 60})
        : params_(params), quad_(quad) {
        params_.validate();
        quad_.validate();
    }

    const CosmoParams& params() const { return params_; }
    const QuadratureSpec& quadrature() const { return quad_; }

    // integral of I over [1, 1+z]
    double integral(double z) const { return integral_upto(1.0 + z); }

    double luminosity_distance(double z) const {
        require_nonneg(z);
        return (1.0 + z) * integral(z);
    }

    // R[z] = D_L/(1+z)^2
    double R(double z) const {
        require_nonneg(z);
        return integral(z) / (1.0 + z);
    }

    // R_z = [(1+z) I(1+z) - int_1^{1+z} I] / (1+z)^2
    double dRdz(double z) const {
        require_nonneg(z);
        const double u = 1.0 + z;
        return integrand(u, params_) / u - integral(z) / (u * u);
    }

    double d2Rdz2(double z) const {
        if (!(z > 0)) throw std::invalid_argument("d2Rdz2: z must be positive");
        const double u = 1.0 + z;
        return integrand_deriv(u, params_) / u - 2.0 * integrand(u, params_) / (u * u) +
               2.0 * integral(z) / (u * u * u);
    }

    double d3Rdz3(double z) const {
        if (!(z > 0)) throw std::invalid_argument("d3Rdz3: z must be positive");
        const double u = 1.0 + z;
        return integrand_deriv2(u, params_) / u - 3.0 * integrand_deriv(u, params_) / (u * u) +
               6.0 * integrand(u, params_) / (u * u * u) - 6.0 * integral(z) / (u * u * u * u);
    }

    // numerator of R_z: N(z) = (1+z) I(1+z) - int_1^{1+z} I, strictly decreasing in z
    double rz_numerator(double z) const {
        const double u = 1.0 + z;
        return u * integrand(u, params_) - integral(z);
    }

private:
    static void require_nonneg(double z) {
        if (!(z >= 0)) throw std::invalid_argument("LuminosityCurve: z must be nonnegative");
    }

    double integral_upto(double u) const {
        if (u < 1.0) throw std::invalid_argument("LuminosityCurve: upper limit below 1");
        const auto f = [this](double y) { return integrand(y, params_); };
        std::lock_guard<std::mutex> lock(mutex_);
        const std::size_t k = static_cast<std::size_t>((u - 1.0) / panel_width_);
        while (prefix_.size() <= k) {
            const double a = 1.0 + panel_width_ * static_cast<double>(prefix_.size() - 1);
            prefix_.push_back(prefix_.back() + integrate_adaptive(f, a, a + panel_width_, quad_));
        }
        const double a = 1.0 + panel_width_ * static_cast<double>(k);
        return prefix_[k] + integrate_adaptive(f, a, u, quad_);
    }

    CosmoParams params_;
    QuadratureSpec quad_;
    static constexpr double panel_width_ = 0.25;
    mutable std::mutex mutex_;
    mutable std::vector<double> prefix_{0.0}; // prefix_[k] = int over [1, 1 + k*width]
};

// free-function spellings used by callers that own a QuadratureSpec
inline double luminosity_distance(double z, const CosmoParams& p, const QuadratureSpec& q = {}) {
    return LuminosityCurve(p, q).luminosity_distance(z);
}
inline double shell_radius(double z, const CosmoParams& p, const QuadratureSpec& q = {}) {
    return LuminosityCurve(p, q).R(z);
}
inline double shell_radius_deriv(double z, const CosmoParams& p, const QuadratureSpec& q = {}) {
    return LuminosityCurve(p, q).dRdz(z);
}
inline double shell_radius_second_deriv(double z, const CosmoParams& p, const QuadratureSpec& q = {}) {
    return LuminosityCurve(p, q).d2Rdz2(z);
}

} // namespace ltb
