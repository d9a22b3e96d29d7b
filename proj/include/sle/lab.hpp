#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sle/halfplane.hpp"
#include "sle/loewner.hpp"
#include "sle/nv.hpp"

namespace sle {

/// max |a(t) - b(t)| over the union of both time grids, each trace linear in time.
double sup_distance(const Trace& a, const Trace& b);

/**
 * (1/T * int_0^T |a(t) - b(t)|^p dt)^(1/p), p >= 2, by 15-point Gauss-Legendre
 * on each interval of the union grid.
 */
double lp_distance(const Trace& a, const Trace& b, double p);

/// Trace-producing method selectable in studies and on the command line.
enum class Method { nv, constant, linear, sqrt_profile, euler_reference };

const char* to_string(Method method);
Method parse_method(const std::string& name);
bool is_forward(Method method);

struct ErrorReport {
    std::size_t n = 0;
    double sup_error = 0.0;
    std::map<double, double> lp_error;
    double wall_seconds = 0.0;
};

struct OrderFit {
    double order = 0.0;       ///< minus the slope of log(error) against log(n)
    double intercept = 0.0;
    double std_error = 0.0;   ///< standard error of the slope
    double band_low = 0.0;    ///< 95% band on the order
    double band_high = 0.0;
    std::vector<double> residuals;
    std::size_t points = 0;
};

/// Ordinary least squares on (log n, log error); rows with zero error are skipped.
OrderFit fit_order(const std::vector<std::size_t>& n, const std::vector<double>& error);

struct StudyConfig {
    double kappa = 2.0;
    std::vector<std::uint64_t> seeds{1};
    std::vector<std::size_t> resolutions{64, 128, 256, 512, 1024, 2048, 4096};
    std::size_t reference_n = 32768;
    Method method = Method::nv;
    /// Backward schemes start at i * y0; unset means 1/sqrt(n) per resolution.
    std::optional<double> y0;
    std::vector<double> lp_orders{2.0, 4.0};
    IntegratorOptions integrator;
    unsigned threads = 0;
};

struct StudyResult {
    /// One row per resolution holding the median over seeds.
    std::vector<ErrorReport> rows;
    /// per_seed[s][r]: error report of seed s at resolution r.
    std::vector<std::vector<ErrorReport>> per_seed;
    OrderFit fit;
};

/// Trace of `method` on `path` (y0 used by the backward schemes).
Trace run_method(Method method, double kappa, double y0, const BrownianPath& path,
                 const IntegratorOptions& integrator = {});

/**
 * Same-realization error study. For each seed one path is drawn at the
 * coarsest resolution and bisected up to reference_n, so every study grid is
 * an exact restriction of the reference path. Errors are measured against the
 * reference trace; rows report medians across seeds.
 */
StudyResult convergence_study(const StudyConfig& config);

/// Throws std::invalid_argument unless the ladder is dyadic and below the reference.
void validate_ladder(const std::vector<std::size_t>& resolutions, std::size_t reference_n);

/// Free constants of the rate functions phi1 and phi2.
struct BoundParams {
    double beta1 = 0.5;
    double eps0 = 0.5;
    double subpower_alpha = 1.0;
    double kappa = 2.0;
    double eps_n = 0.0;
    double c2 = 1.0;
    double c3 = 1.0;
    double c4 = 1.0;

    void validate() const;
};

/// Subpower function (log(x + e))^alpha.
double subpower(double x, double alpha);

double phi1(std::size_t n, const BoundParams& params);
double phi2(std::size_t n, const BoundParams& params);

struct MomentStat {
    Complex mean;
    double se_re = 0.0;
    double se_im = 0.0;
    std::size_t samples = 0;
};

/// Monte Carlo mean of Z_T^2 for the NV scheme on a uniform n-grid of [0, 1].
MomentStat second_moment_stat(double kappa, double y0, std::size_t n, std::size_t samples,
                              std::uint64_t seed, unsigned threads = 0);

}  // namespace sle
