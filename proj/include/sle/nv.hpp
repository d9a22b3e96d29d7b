#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "sle/brownian.hpp"
#include "sle/halfplane.hpp"

namespace sle {

enum class Scheme { nv, piecewise_constant, euler_reference };

const char* to_string(Scheme scheme);

/// Parameters of a backward-flow run started from i * y0.
struct SchemeConfig {
    double kappa = 2.0;
    double y0 = 0.1;
    double horizon = 1.0;
    Scheme scheme = Scheme::nv;
    /// Step tolerance for adaptive_run; +inf disables refinement.
    double tolerance = std::numeric_limits<double>::infinity();
    int max_refine_depth = 8;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

/// Initial height 1/sqrt(n) used at resolution n.
double auto_y0(std::size_t n);

/// exp(t L0) z = sqrt(z^2 - 4t): the drift flow of dZ = -2/Z dt.
HalfPlanePoint flow_l0(HalfPlanePoint z, double t);

/// exp(b L1) z = z + sqrt(kappa) b: the noise flow.
HalfPlanePoint flow_l1(HalfPlanePoint z, double b, double kappa);

/**
 * One Ninomiya-Victoir step of dZ = -2/Z dt + sqrt(kappa) dB:
 * half drift, full noise increment, half drift. h = 0 is a pure translation.
 */
HalfPlanePoint nv_step(HalfPlanePoint z, double h, double dB, double kappa);

/// Iterates nv_step over the path's grid from i * y0.
Trace run_nv(const SchemeConfig& config, const BrownianPath& path);

/**
 * Same trajectory as run_nv, assembled per interval from two constant-force
 * backward Loewner maps (force 0, duration h/2) around a translation by
 * sqrt(kappa) dB.
 */
Trace compose_constant_maps(const SchemeConfig& config, const BrownianPath& path);

/**
 * NV output inside [t_k, t_k + h] at offset s:
 *   z + sqrt(k) dB_partial - 2s / (sqrt(z^2 - 2s) + z) - 2s / (sqrt(B^2 - 2s) + B)
 * with B = sqrt(z^2 - 2h) + sqrt(k) dB_full.
 */
HalfPlanePoint dense_eval(HalfPlanePoint z_k, double h, double dB_partial, double dB_full, double s,
                          double kappa);

/**
 * Evaluates the coarse NV trajectory at every node of `fine` with dense_eval.
 * `fine` must be a refinement of `coarse` (same ω).
 */
Trace dense_trace(const SchemeConfig& config, const BrownianPath& coarse, const BrownianPath& fine);

struct AdaptiveResult {
    Trace trace;
    BrownianPath path;
    /// capped[k] is set when step k was accepted at the depth cap with |dZ| > tol.
    std::vector<bool> capped;
    std::size_t refinements = 0;
};

/**
 * NV with midpoint refinement: an interval whose step moves Z by more than
 * config.tolerance is bisected (bridge draw) and re-run, up to
 * config.max_refine_depth bisections per original interval.
 */
AdaptiveResult adaptive_run(const SchemeConfig& config, const BrownianPath& path);

/**
 * Euler-Maruyama oracle. Drift is sub-stepped so every drift step satisfies
 * |2 dt / Z| <= Im(Z) / 2; the interval's Brownian increment is added after
 * the drift sub-steps.
 */
Trace run_euler_reference(const SchemeConfig& config, const BrownianPath& path);

/// Dispatches on config.scheme (nv, piecewise_constant, euler_reference).
Trace run_backward(const SchemeConfig& config, const BrownianPath& path);

}  // namespace sle
