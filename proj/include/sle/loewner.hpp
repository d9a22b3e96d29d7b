#pragma once

#include <span>
#include <vector>

#include "sle/brownian.hpp"
#include "sle/halfplane.hpp"

namespace sle {

/// g_t(z) = A + sqrt((z - A)^2 + 4t): forward chain of the constant driver A.
HalfPlanePoint constant_forward_map(HalfPlanePoint z, double A, double t);

/// h_T(z) = A + sqrt((z - A)^2 - 4T): inverse of constant_forward_map at time T.
HalfPlanePoint constant_backward_map(HalfPlanePoint z, double A, double T);

/**
 * Step control for the Loewner ODE integrator (classical RK4).
 *
 * A step never moves g - lambda by more than max_relative_move of its current
 * size, and never exceeds 1/substeps_per_unit of time (one step minimum per
 * segment). Setting max_relative_move to +inf gives uniform steps, which is
 * what the self-convergence checks use.
 */
struct IntegratorOptions {
    int substeps_per_unit = 64;
    double max_relative_move = 0.01;
};

/// Swallow threshold used by integrate_forward for a start point z.
double swallow_threshold(Complex z);

struct SwallowReport {
    bool swallowed = false;
    /// Swallowing time if swallowed, otherwise the end of the driver.
    double time = 0.0;
    HalfPlanePoint final;
};

/**
 * Integrates d/dt g = 2 / (g - lambda(t)) from g_0 = z across a tiling of
 * driver segments. Stops and reports when |g - lambda| falls below
 * swallow_threshold(z); the crossing time is refined by bisection on the last
 * step.
 */
SwallowReport integrate_forward(HalfPlanePoint z, std::span<const DriverSegment> segments,
                                const IntegratorOptions& options = {});

/**
 * Backward Loewner flow d/dt h = -2 / (h - lambda(t)) from h_0 = z across a
 * tiling of driver segments.
 */
HalfPlanePoint integrate_backward(HalfPlanePoint z, std::span<const DriverSegment> segments,
                                  const IntegratorOptions& options = {});

/**
 * Inverse of the single-segment forward map, recentred: w is measured from the
 * driver value at t_b, the result from the value at t_a. Flat segments use the
 * closed form; others integrate the Loewner ODE backwards in time.
 */
HalfPlanePoint inverse_segment_map(HalfPlanePoint w, const DriverSegment& segment,
                                   const IntegratorOptions& options = {});

/**
 * Zipper trace of an arbitrary piecewise driver at the given node times.
 *
 * Node k is f_{t_k}(lambda(t_k) + i0), built as G_0 o ... o G_{k-1} applied to
 * the tip of the last interval; the returned points are absolute (shifted by
 * lambda(t_0)). Segments may straddle nodes.
 */
Trace zipper_trace(std::span<const DriverSegment> segments, std::span<const double> nodes,
                   const IntegratorOptions& options = {});

/// Zipper trace of driver_view(path, kappa, kind) at the path's grid nodes.
Trace trace_interpolated_driver(const BrownianPath& path, double kappa, DriverKind kind,
                                const IntegratorOptions& options = {});

/// 2 - 2 rho cot(rho) + 2 i rho: trace of the driver lambda(t) = t, 0 < rho < pi.
HalfPlanePoint linear_driver_reference_curve(double rho);

}  // namespace sle
