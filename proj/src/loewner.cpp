#include "sle/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace sle {

HalfPlanePoint constant_forward_map(HalfPlanePoint z, double A, double t)
{
    require_interior(z, "constant_forward_map");
    const Complex d = z.value() - A;
    return HalfPlanePoint(A + sqrt_upper(d * d + 4.0 * t));
}

HalfPlanePoint constant_backward_map(HalfPlanePoint z, double A, double T)
{
    require_interior(z, "constant_backward_map");
    const Complex d = z.value() - A;
    return HalfPlanePoint(A + sqrt_upper(d * d - 4.0 * T));
}

double swallow_threshold(Complex z)
{
    return 1e-9 * (1.0 + std::abs(z));
}

namespace {

/// The part [lo, hi] of a driver segment. Sqrt-profile pieces are integrated
/// in u = sqrt(t - t_a), where the driver is affine and the ODE is smooth.
struct Piece {
    const DriverSegment* seg;
    double lo;
    double hi;

    bool sqrt_param() const { return seg->kind == DriverKind::sqrt_profile && seg->a != 0.0; }
    double u_of(double t) const { return sqrt_param() ? std::sqrt(std::max(t - seg->t_a, 0.0)) : t; }
    double t_of(double u) const { return sqrt_param() ? seg->t_a + u * u : u; }
    double dt_du(double u) const { return sqrt_param() ? 2.0 * u : 1.0; }
    double lambda(double u) const
    {
        if (sqrt_param()) return seg->b + seg->a * u;
        return (*seg)(u);
    }
    double slope() const { return seg->kind == DriverKind::constant ? 0.0 : std::abs(seg->a); }
    bool flat() const { return seg->is_flat(); }
    double value_lo() const { return (*seg)(lo); }
    double value_hi() const { return (*seg)(hi); }
};

/// dg/du = sign * 2 t'(u) / (g - lambda(u))
struct Field {
    const Piece& piece;
    double sign;

    Complex operator()(Complex g, double u) const
    {
        return sign * 2.0 * piece.dt_du(u) / (g - piece.lambda(u));
    }
};

Complex rk4(const Field& f, Complex g, double u, double du)
{
    const Complex k1 = f(g, u);
    const Complex k2 = f(g + 0.5 * du * k1, u + 0.5 * du);
    const Complex k3 = f(g + 0.5 * du * k2, u + 0.5 * du);
    const Complex k4 = f(g + du * k3, u + du);
    return g + du / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Crossing {
    double t;
    Complex g;
};

constexpr long kMaxSteps = 50'000'000;

/**
 * Integrates the Loewner ODE with the given sign across one piece, from time
 * t_from to t_to (either direction). With a swallow threshold, stops at the
 * first time |g - lambda| drops below it.
 */
Complex flow_piece(Complex g, const Piece& piece, double t_from, double t_to, double sign,
                   const IntegratorOptions& opt, std::optional<double> threshold,
                   std::optional<Crossing>& crossing)
{
    const Field field{piece, sign};
    const double u0 = piece.u_of(t_from);
    const double u1 = piece.u_of(t_to);
    const double span = std::abs(u1 - u0);
    if (span == 0.0) return g;
    const double dir = u1 > u0 ? 1.0 : -1.0;

    const double t_span = std::abs(t_to - t_from);
    const double min_steps = std::max(1.0, std::ceil(opt.substeps_per_unit * t_span));
    const double du_cap = span / min_steps;
    const double frac = opt.max_relative_move;

    double u = u0;
    for (long step = 0; step < kMaxSteps; ++step) {
        const double remaining = dir > 0 ? u1 - u : u - u1;
        if (remaining <= 0.0) return g;

        double du = std::min(du_cap, remaining);
        if (std::isfinite(frac)) {
            const double gap = std::abs(g - piece.lambda(u));
            const double rate_t = std::max(piece.dt_du(u), piece.dt_du(u + dir * du));
            const double speed = 2.0 * rate_t / gap + piece.slope();
            du = std::min(du, frac * gap / speed);
        }
        const bool last = du >= remaining;
        const double u_next = last ? u1 : u + dir * du;
        const double h = u_next - u;
        if (h == 0.0 || piece.t_of(u_next) == piece.t_of(u)) {
            // The orbit is within time resolution of the driver.
            if (threshold) {
                crossing = Crossing{piece.t_of(u), g};
                return g;
            }
            throw std::runtime_error("Loewner integrator: step size underflow");
        }

        const Complex g_next = rk4(field, g, u, h);
        if (threshold) {
            auto below = [&](Complex gv, double uv) {
                return !std::isfinite(gv.real()) || !std::isfinite(gv.imag()) ||
                       std::abs(gv - piece.lambda(uv)) < *threshold;
            };
            if (below(g_next, u_next)) {
                double lo = 0.0;
                double hi = h;
                for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid == lo || mid == hi) break;
                    if (below(rk4(field, g, u, mid), u + mid)) hi = mid; else lo = mid;
                }
                const double u_hit = u + hi;
                Complex g_hit = rk4(field, g, u, hi);
                if (!std::isfinite(g_hit.real()) || !std::isfinite(g_hit.imag())) {
                    g_hit = rk4(field, g, u, lo);
                }
                crossing = Crossing{piece.t_of(u_hit), g_hit};
                return g_hit;
            }
        }
        g = g_next;
        u = u_next;
        if (last) return g;
    }
    throw std::runtime_error("Loewner integrator: step budget exhausted");
}

Complex inverse_piece(Complex w, const Piece& piece, const IntegratorOptions& opt)
{
    if (piece.flat()) {
        return sqrt_upper(w * w - 4.0 * (piece.hi - piece.lo));
    }
    std::optional<Crossing> unused;
    const Complex g = flow_piece(w + piece.value_hi(), piece, piece.hi, piece.lo, 1.0, opt,
                                 std::nullopt, unused);
    return g - piece.value_lo();
}

/// Inverse map over consecutive pieces, recentred at both ends.
Complex inverse_chain(Complex w, std::span<const Piece> pieces, const IntegratorOptions& opt)
{
    for (std::size_t j = pieces.size(); j-- > 0;) {
        w = inverse_piece(w, pieces[j], opt);
        if (j > 0) w += pieces[j].value_lo() - pieces[j - 1].value_hi();
    }
    return w;
}

/// Limit of inverse_chain at w -> 0 from above.
Complex chain_tip(std::span<const Piece> pieces, const IntegratorOptions& opt)
{
    const Piece& last = pieces.back();
    if (last.flat()) {
        Complex w = sqrt_upper(Complex(-4.0 * (last.hi - last.lo), 0.0));
        const auto rest = pieces.first(pieces.size() - 1);
        if (rest.empty()) return w;
        w += last.value_lo() - rest.back().value_hi();
        return inverse_chain(w, rest, opt);
    }
    // Near the tip the inverse map is z0 + c w^2 + O(w^3); eliminate the w^2
    // term from two heights.
    const double y = std::sqrt(pieces.back().hi - pieces.front().lo) / 100.0;
    const Complex far = inverse_chain(Complex(0.0, y), pieces, opt);
    const Complex near = inverse_chain(Complex(0.0, 0.5 * y), pieces, opt);
    return (4.0 * near - far) / 3.0;
}

void check_tiling(std::span<const DriverSegment> segments)
{
    if (segments.empty()) throw std::invalid_argument("driver has no segments");
    for (std::size_t k = 0; k + 1 < segments.size(); ++k) {
        if (segments[k].t_b != segments[k + 1].t_a) {
            throw std::invalid_argument("driver segments do not tile an interval");
        }
    }
}

}  // namespace

SwallowReport integrate_forward(HalfPlanePoint z, std::span<const DriverSegment> segments,
                                const IntegratorOptions& options)
{
    require_interior(z, "integrate_forward");
    check_tiling(segments);
    const double threshold = swallow_threshold(z);
    Complex g = z;
    for (const auto& seg : segments) {
        const Piece piece{&seg, seg.t_a, seg.t_b};
        std::optional<Crossing> crossing;
        g = flow_piece(g, piece, seg.t_a, seg.t_b, 1.0, options, threshold, crossing);
        if (crossing) {
            const Complex g_hit(crossing->g.real(), std::max(crossing->g.imag(), 0.0));
            return {true, crossing->t, HalfPlanePoint(g_hit)};
        }
    }
    return {false, segments.back().t_b, HalfPlanePoint(g)};
}

HalfPlanePoint integrate_backward(HalfPlanePoint z, std::span<const DriverSegment> segments,
                                  const IntegratorOptions& options)
{
    require_interior(z, "integrate_backward");
    check_tiling(segments);
    Complex h = z;
    for (const auto& seg : segments) {
        if (seg.is_flat()) {
            const Complex d = h - seg.b;
            h = seg.b + sqrt_upper(d * d - 4.0 * seg.duration());
            continue;
        }
        const Piece piece{&seg, seg.t_a, seg.t_b};
        std::optional<Crossing> unused;
        h = flow_piece(h, piece, seg.t_a, seg.t_b, -1.0, options, std::nullopt, unused);
    }
    return HalfPlanePoint(h);
}

HalfPlanePoint inverse_segment_map(HalfPlanePoint w, const DriverSegment& segment,
                                   const IntegratorOptions& options)
{
    require_interior(w, "inverse_segment_map");
    const Piece piece{&segment, segment.t_a, segment.t_b};
    return HalfPlanePoint(inverse_piece(w, piece, options));
}

Trace zipper_trace(std::span<const DriverSegment> segments, std::span<const double> nodes,
                   const IntegratorOptions& options)
{
    check_tiling(segments);
    if (nodes.size() < 2) throw std::invalid_argument("zipper_trace: need at least two nodes");
    if (nodes.front() < segments.front().t_a || nodes.back() > segments.back().t_b) {
        throw std::invalid_argument("zipper_trace: nodes outside the driver's span");
    }

    // Split the driver at the nodes: intervals[k] covers [nodes[k], nodes[k+1]].
    std::vector<std::vector<Piece>> intervals(nodes.size() - 1);
    std::size_t s = 0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double lo = nodes[k];
        const double hi = nodes[k + 1];
        if (!(hi > lo)) throw std::invalid_argument("zipper_trace: nodes must increase");
        while (segments[s].t_b <= lo) ++s;
        for (std::size_t j = s; j < segments.size() && segments[j].t_a < hi; ++j) {
            const double a = std::max(lo, segments[j].t_a);
            const double b = std::min(hi, segments[j].t_b);
            if (b > a) intervals[k].push_back(Piece{&segments[j], a, b});
        }
    }

    const double base = driver_value(segments, nodes.front());
    std::vector<double> times(nodes.begin(), nodes.end());
    std::vector<HalfPlanePoint> points;
    points.reserve(nodes.size());
    points.emplace_back(base, 0.0);
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        Complex w = chain_tip(intervals[k - 1], options);
        for (std::size_t j = k - 1; j-- > 0;) {
            w = inverse_chain(w, intervals[j], options);
        }
        points.emplace_back(w + base);
    }
    return Trace(std::move(times), std::move(points));
}

Trace trace_interpolated_driver(const BrownianPath& path, double kappa, DriverKind kind,
                                const IntegratorOptions& options)
{
    const auto segments = driver_view(path, kappa, kind);
    return zipper_trace(segments, path.grid().times(), options);
}

HalfPlanePoint linear_driver_reference_curve(double rho)
{
    if (!(rho > 0.0 && rho < std::numbers::pi)) {
        throw std::out_of_range("linear_driver_reference_curve: rho must lie in (0, pi)");
    }
    return HalfPlanePoint(2.0 - 2.0 * rho / std::tan(rho), 2.0 * rho);
}

}  // namespace sle
