#pragma once

// Gamma and Mittag-Leffler evaluation on the real line.
//
// The Mittag-Leffler function E_{beta,alpha}(z) = sum_j z^j / Gamma(j*beta + alpha)
// generalizes exp (E_{1,1} = exp) and is the eigenfunction of fractional-order
// linear dynamics.  Evaluation is series-only on a documented safe range where
// truncation at max_terms meets the requested tolerance in double precision;
// arguments outside that range fail loudly instead of returning garbage.

#include <cmath>
#include <string>
#include <vector>

#include "frond/errors.hpp"

namespace frond {

namespace detail {

// Rational part of the Lanczos approximation, 13 terms, g chosen for double
// precision (theoretical error ~1.2e-17).  Coefficients are the standard
// published set; the denominator is z(z+1)...(z+11) expanded.
inline constexpr double kLanczosG = 6.024680040776729583740234375;

inline double lanczos_sum(double x) {
    static const double num[13] = {
        23531376880.410759688572007674451636754734846804940,
        42919803642.649098768957899047001988850926355848959,
        35711959237.355668049440185451547166705960488635843,
        17921034426.037209699919755754458931112671403265390,
        6039542586.3520280050642916443072979210699388420708,
        1439720407.3117216736632230727949123939715485786772,
        248874557.86205415651146038641322942321632125127801,
        31426415.585400194380614231628318205362874684987640,
        2876370.6289353724412254090516208496135991145378768,
        186056.26539522349504029498971604569928220784236328,
        8071.6720023658162106380029022722506138218516325024,
        210.82427775157934587250973392071336271166969580291,
        2.5066282746310002701649081771338373386264310793408,
    };
    static const double den[13] = {
        0.0,       39916800.0, 120543840.0, 150917976.0, 105258076.0,
        45995730.0, 13339535.0, 2637558.0,  357423.0,    32670.0,
        1925.0,    66.0,       1.0,
    };
    double p = 0.0;
    double q = 0.0;
    if (x <= 1.0) {
        for (int i = 12; i >= 0; --i) {
            p = p * x + num[i];
            q = q * x + den[i];
        }
    } else {
        // Evaluate in 1/x so neither polynomial overflows for large x.
        const double z = 1.0 / x;
        for (int i = 0; i <= 12; ++i) {
            p = p * z + num[i];
            q = q * z + den[i];
        }
    }
    return p / q;
}

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Largest x with Gamma(x) representable in double.
inline constexpr double kGammaOverflowX = 171.624;

}  // namespace detail

/// Gamma function on the real line.  Poles at non-positive integers and
/// overflow beyond the representable range raise numeric_error.
inline double gamma_fn(double x) {
    if (!std::isfinite(x)) {
        throw numeric_error("special_fn", "gamma: non-finite argument");
    }
    if (x <= 0.0 && x == std::floor(x)) {
        throw numeric_error("special_fn",
                            "gamma: pole at non-positive integer x=" + std::to_string(x));
    }
    if (x > detail::kGammaOverflowX) {
        throw numeric_error("special_fn",
                            "gamma: overflow, x=" + std::to_string(x) + " exceeds 171.624");
    }
    if (x < 0.5) {
        // Reflection Gamma(x) Gamma(1-x) = pi / sin(pi x).
        return detail::kPi / (std::sin(detail::kPi * x) * gamma_fn(1.0 - x));
    }
    const double zgh = x + detail::kLanczosG - 0.5;
    // Split the power so intermediates stay representable up to x ~ 171.
    const double half_pow = std::pow(zgh, 0.5 * (x - 0.5));
    return detail::lanczos_sum(x) * (half_pow * std::exp(-zgh)) * half_pow;
}

/// log(Gamma(x)) for x > 0.
inline double log_gamma(double x) {
    if (!(x > 0.0)) {
        throw numeric_error("special_fn", "log_gamma: requires x > 0");
    }
    if (x < 0.5) {
        return std::log(detail::kPi / std::sin(detail::kPi * x)) - log_gamma(1.0 - x);
    }
    const double zgh = x + detail::kLanczosG - 0.5;
    return std::log(detail::lanczos_sum(x)) + (x - 0.5) * std::log(zgh) - zgh;
}

struct MlfParams {
    double beta = 1.0;   // series order, > 0
    double alpha = 1.0;  // second parameter, > 0
    double tol = 1e-12;  // relative truncation tolerance
    int max_terms = 400;

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta)) {
            throw config_error("special_fn", "mlf: beta must be positive");
        }
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw config_error("special_fn", "mlf: alpha must be positive");
        }
        if (!(tol > 0.0)) {
            throw config_error("special_fn", "mlf: tol must be positive");
        }
        if (max_terms < 1) {
            throw config_error("special_fn", "mlf: max_terms must be >= 1");
        }
    }
};

/// Upper end of the series-safe range.  (100*beta)^beta keeps the peak term
/// index near 100, which leaves room for the tail to clear tol=1e-12 within
/// 400 terms for every beta in (0, 1].  For the bound regime z = L*T^beta this
/// admits any L < 1 at T = 10, and L <= 0.93 at T = 20 even for beta = 0.1.
inline double mlf_safe_zmax(double beta) {
    return std::pow(100.0 * beta, beta);
}

/// Lower (negative) end of the safe range.  Beyond -6 the alternating series
/// cancellation costs more digits than the evaluation contract allows, and on
/// the negative side the small sum makes the relative stopping rule bite
/// later, so the cap sits below the positive one.
inline double mlf_safe_zmin(double beta) {
    return -std::min(6.0, 0.85 * mlf_safe_zmax(beta));
}

/// Two-parameter Mittag-Leffler function by direct series summation.
/// Terms are formed in log space and accumulated with compensated summation.
inline double mlf(double z, const MlfParams& params) {
    params.validate();
    if (!std::isfinite(z)) {
        throw numeric_error("special_fn", "mlf: non-finite argument");
    }
    const double zmax = mlf_safe_zmax(params.beta);
    const double zmin = mlf_safe_zmin(params.beta);
    if (z > zmax || z < zmin) {
        throw numeric_error("special_fn",
                            "mlf: z=" + std::to_string(z) + " outside series-safe range [" +
                                std::to_string(zmin) + ", " + std::to_string(zmax) +
                                "] for beta=" + std::to_string(params.beta));
    }
    if (z == 0.0) {
        return params.alpha == 1.0 ? 1.0 : 1.0 / gamma_fn(params.alpha);
    }

    const double log_abs_z = std::log(std::fabs(z));
    const bool negative = z < 0.0;
    double sum = 0.0;
    double comp = 0.0;  // Kahan compensation
    int small_streak = 0;
    for (int j = 0; j < params.max_terms; ++j) {
        double term = std::exp(j * log_abs_z - log_gamma(j * params.beta + params.alpha));
        if (negative && (j & 1)) {
            term = -term;
        }
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (j > 0) {
            // Two consecutive negligible terms guard against transient dips
            // in alternating-sign tails.
            if (std::fabs(term) <= params.tol * std::fabs(sum)) {
                if (++small_streak >= 2) {
                    if (!std::isfinite(sum)) {
                        throw numeric_error("special_fn", "mlf: non-finite series value");
                    }
                    return sum;
                }
            } else {
                small_streak = 0;
            }
        }
    }
    throw numeric_error("special_fn",
                        "mlf: series did not converge within " +
                            std::to_string(params.max_terms) + " terms at z=" +
                            std::to_string(z) + ", beta=" + std::to_string(params.beta));
}

inline double mlf(double z, double beta, double alpha = 1.0) {
    MlfParams p;
    p.beta = beta;
    p.alpha = alpha;
    return mlf(z, p);
}

/// Perturbation-bound factor E_beta(L * T^beta).  Equals exp(L*T) at beta = 1.
inline double mlf_bound(double beta, double L, double T) {
    if (!(beta > 0.0) || beta > 1.0) {
        throw config_error("special_fn", "mlf_bound: beta must be in (0, 1]");
    }
    if (!(L > 0.0) || !(T > 0.0)) {
        throw config_error("special_fn", "mlf_bound: L and T must be positive");
    }
    return mlf(L * std::pow(T, beta), beta);
}

struct BoundScanRow {
    double beta = 0.0;
    double bound = 0.0;
};

struct BoundScan {
    std::vector<BoundScanRow> rows;
    bool strictly_increasing = true;  // vacuously true for singleton grids
};

/// Bound factor over an ascending beta grid, with a strict-monotonicity flag.
/// The monotone regime is L < 1 with T large; the scan itself just reports
/// what the numbers do.
inline BoundScan bound_monotonicity_scan(double L, double T, const std::vector<double>& grid) {
    if (grid.empty()) {
        throw config_error("special_fn", "bound scan: empty beta grid");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || grid[i] > 1.0) {
            throw config_error("special_fn", "bound scan: grid values must be in (0, 1]");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw config_error("special_fn", "bound scan: grid must be strictly ascending");
        }
    }
    BoundScan scan;
    scan.rows.reserve(grid.size());
    for (double beta : grid) {
        scan.rows.push_back({beta, mlf_bound(beta, L, T)});
    }
    for (std::size_t i = 1; i < scan.rows.size(); ++i) {
        if (!(scan.rows[i].bound > scan.rows[i - 1].bound)) {
            scan.strictly_increasing = false;
            break;
        }
    }
    return scan;
}

}  // namespace frond
