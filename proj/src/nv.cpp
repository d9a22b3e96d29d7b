#include "sle/nv.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "sle/loewner.hpp"

namespace sle {

const char* to_string(Scheme scheme)
{
    switch (scheme) {
    case Scheme::nv: return "nv";
    case Scheme::piecewise_constant: return "piecewise-constant";
    case Scheme::euler_reference: return "euler-ref";
    }
    return "unknown";
}

void SchemeConfig::validate() const
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be positive");
    if (!(y0 > 0.0) || !std::isfinite(y0)) throw std::invalid_argument("y0 must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("horizon must be positive");
    }
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_refine_depth < 0) throw std::invalid_argument("max refine depth must be non-negative");
}

double auto_y0(std::size_t n)
{
    if (n == 0) throw std::invalid_argument("auto_y0: resolution must be positive");
    return 1.0 / std::sqrt(static_cast<double>(n));
}

HalfPlanePoint flow_l0(HalfPlanePoint z, double t)
{
    require_interior(z, "flow_l0");
    const Complex v = z.value();
    return HalfPlanePoint(sqrt_upper(v * v - 4.0 * t));
}

HalfPlanePoint flow_l1(HalfPlanePoint z, double b, double kappa)
{
    return HalfPlanePoint(z.re() + std::sqrt(kappa) * b, z.im());
}

HalfPlanePoint nv_step(HalfPlanePoint z, double h, double dB, double kappa)
{
    if (!(h >= 0.0)) throw std::invalid_argument("nv_step: negative step");
    return flow_l0(flow_l1(flow_l0(z, 0.5 * h), dB, kappa), 0.5 * h);
}

namespace {

void check_run(const SchemeConfig& config, const BrownianPath& path)
{
    config.validate();
    const double T = path.grid().horizon();
    if (std::abs(T - config.horizon) > 1e-12 * config.horizon) {
        throw std::invalid_argument("path horizon " + std::to_string(T) +
                                    " differs from configured horizon " +
                                    std::to_string(config.horizon));
    }
}

template <class Step>
Trace iterate(const SchemeConfig& config, const BrownianPath& path, Step step)
{
    check_run(config, path);
    const auto& grid = path.grid();
    std::vector<double> times(grid.times().begin(), grid.times().end());
    std::vector<HalfPlanePoint> points;
    points.reserve(grid.size());
    HalfPlanePoint z(0.0, config.y0);
    points.push_back(z);
    for (std::size_t k = 0; k < grid.intervals(); ++k) {
        z = step(z, grid.step(k), path.increment(k));
        points.push_back(z);
    }
    return Trace(std::move(times), std::move(points));
}

}  // namespace

Trace run_nv(const SchemeConfig& config, const BrownianPath& path)
{
    return iterate(config, path, [&](HalfPlanePoint z, double h, double dB) {
        return nv_step(z, h, dB, config.kappa);
    });
}

Trace compose_constant_maps(const SchemeConfig& config, const BrownianPath& path)
{
    const double root_kappa = std::sqrt(config.kappa);
    return iterate(config, path, [&](HalfPlanePoint z, double h, double dB) {
        const HalfPlanePoint first = constant_backward_map(z, 0.0, 0.5 * h);
        const HalfPlanePoint moved(first.re() + root_kappa * dB, first.im());
        return constant_backward_map(moved, 0.0, 0.5 * h);
    });
}

HalfPlanePoint dense_eval(HalfPlanePoint z_k, double h, double dB_partial, double dB_full, double s,
                          double kappa)
{
    if (!(s >= 0.0 && s <= h)) throw std::out_of_range("dense_eval: s outside [0, h]");
    require_interior(z_k, "dense_eval");
    if (s == 0.0) return z_k;
    const double root_kappa = std::sqrt(kappa);
    const Complex z = z_k.value();
    const Complex b = sqrt_upper(z * z - 2.0 * h) + root_kappa * dB_full;
    const Complex out = z + root_kappa * dB_partial - 2.0 * s / (sqrt_upper(z * z - 2.0 * s) + z) -
                        2.0 * s / (sqrt_upper(b * b - 2.0 * s) + b);
    return HalfPlanePoint(out);
}

Trace dense_trace(const SchemeConfig& config, const BrownianPath& coarse, const BrownianPath& fine)
{
    const Trace nodes = run_nv(config, coarse);
    const auto& cg = coarse.grid();
    const auto& fg = fine.grid();
    if (fg.horizon() != cg.horizon()) throw std::invalid_argument("dense_trace: horizons differ");

    std::vector<double> times(fg.times().begin(), fg.times().end());
    std::vector<HalfPlanePoint> points;
    points.reserve(fg.size());
    std::size_t k = 0;
    for (std::size_t j = 0; j < fg.size(); ++j) {
        const double t = fg[j];
        while (k + 1 < cg.intervals() && cg[k + 1] <= t) ++k;
        if (t == cg[k]) {
            if (fine.value(j) != coarse.value(k)) {
                throw std::invalid_argument("dense_trace: fine path is not a refinement of coarse");
            }
            points.push_back(nodes.point(k));
            continue;
        }
        if (t == cg.horizon()) {
            points.push_back(nodes.back());
            continue;
        }
        points.push_back(dense_eval(nodes.point(k), cg.step(k), fine.value(j) - coarse.value(k),
                                    coarse.increment(k), t - cg[k], config.kappa));
    }
    return Trace(std::move(times), std::move(points));
}

AdaptiveResult adaptive_run(const SchemeConfig& config, const BrownianPath& path)
{
    check_run(config, path);
    const auto& grid = path.grid();
    const double tol = config.tolerance;

    std::vector<double> times{grid[0]};
    std::vector<double> values{path.value(0)};
    std::vector<HalfPlanePoint> points{HalfPlanePoint(0.0, config.y0)};
    std::vector<bool> capped;
    std::size_t refinements = 0;

    std::function<void(double, double, double, double, int)> advance =
        [&](double ta, double wa, double tb, double wb, int depth) {
            const HalfPlanePoint z = points.back();
            const HalfPlanePoint next = nv_step(z, tb - ta, wb - wa, config.kappa);
            const double move = std::abs(next.value() - z.value());
            const double mid = 0.5 * (ta + tb);
            const bool can_split = depth < config.max_refine_depth && mid > ta && mid < tb;
            if (move <= tol || !can_split) {
                times.push_back(tb);
                values.push_back(wb);
                points.push_back(next);
                capped.push_back(move > tol);
                return;
            }
            ++refinements;
            const double wm = bridge_draw(path.seed(), ta, wa, tb, wb);
            advance(ta, wa, mid, wm, depth + 1);
            advance(mid, wm, tb, wb, depth + 1);
        };

    for (std::size_t k = 0; k < grid.intervals(); ++k) {
        advance(grid[k], path.value(k), grid[k + 1], path.value(k + 1), 0);
    }

    AdaptiveResult out{Trace(times, std::move(points)),
                       BrownianPath(TimeGrid(times), std::move(values), path.seed()),
                       std::move(capped), refinements};
    return out;
}

Trace run_euler_reference(const SchemeConfig& config, const BrownianPath& path)
{
    const double root_kappa = std::sqrt(config.kappa);
    return iterate(config, path, [&](HalfPlanePoint z, double h, double dB) {
        Complex v = z.value();
        double left = h;
        while (left > 0.0) {
            // |2 dt / v| <= Im(v) / 2
            const double cap = 0.25 * v.imag() * std::abs(v);
            const double dt = std::min(left, cap);
            v -= 2.0 * dt / v;
            left -= dt;
        }
        return HalfPlanePoint(v.real() + root_kappa * dB, v.imag());
    });
}

Trace run_backward(const SchemeConfig& config, const BrownianPath& path)
{
    switch (config.scheme) {
    case Scheme::nv: return run_nv(config, path);
    case Scheme::piecewise_constant: return compose_constant_maps(config, path);
    case Scheme::euler_reference: return run_euler_reference(config, path);
    }
    throw std::invalid_argument("run_backward: unknown scheme");
}

}  // namespace sle
