#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sle/halfplane.hpp"

namespace sle {

/**
 * Counter-based Gaussian source.
 *
 * Every draw is a pure function of (seed, stream, key, salt), so a value can
 * be regenerated in any order, on any thread, without carrying generator
 * state around. Normals come from the inverse normal CDF applied to a 53-bit
 * uniform.
 */
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t bits(std::uint64_t stream, std::uint64_t key, std::uint64_t salt = 0) const;
    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t stream, std::uint64_t key, std::uint64_t salt = 0) const;
    double normal(std::uint64_t stream, std::uint64_t key, std::uint64_t salt = 0) const;

    /// Seed of an independent child generator, e.g. one per Monte Carlo sample.
    std::uint64_t derive(std::uint64_t index) const;

private:
    std::uint64_t seed_;
};

/// Standard Brownian motion sampled at the nodes of a TimeGrid.
class BrownianPath {
public:
    BrownianPath(TimeGrid grid, std::vector<double> values, std::uint64_t seed = 0);

    const TimeGrid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double value(std::size_t k) const { return values_[k]; }
    double increment(std::size_t k) const { return values_[k + 1] - values_[k]; }
    std::uint64_t seed() const { return seed_; }

    friend bool operator==(const BrownianPath&, const BrownianPath&) = default;

private:
    TimeGrid grid_;
    std::vector<double> values_;
    std::uint64_t seed_;
};

/// Independent N(0, t_{k+1} - t_k) increments; identical seeds give identical paths.
BrownianPath sample_path(const TimeGrid& grid, std::uint64_t seed);

/// W == 0 on the grid.
BrownianPath zero_path(const TimeGrid& grid);

/// Brownian-bridge midpoint value for a standard normal variate.
double bridge_midpoint(double w_left, double w_right, double h, double normal);

/**
 * Bridge draw for the midpoint of [t_left, t_right] of the path with the given
 * seed. The variate is keyed by the midpoint time, so a node gets the same
 * value no matter in which order the grid was refined.
 */
double bridge_draw(std::uint64_t seed, double t_left, double w_left, double t_right, double w_right,
                   std::uint64_t salt = 0);

/// Inserts the bridge midpoint of interval k; existing nodes are untouched.
BrownianPath refine_midpoint(const BrownianPath& path, std::size_t k, std::uint64_t salt = 0);

/// Bisects every interval `levels` times; equal to repeated refine_midpoint calls.
BrownianPath refine_all(const BrownianPath& path, unsigned levels = 1);

/// Values of `path` at the nodes of `coarse`; every coarse node must be a path node.
BrownianPath restrict_to(const BrownianPath& path, const TimeGrid& coarse);

/// `t,w` CSV with 17 significant digits.
void write_csv(std::ostream& out, const BrownianPath& path);

enum class DriverKind { constant, linear, sqrt_profile };

const char* to_string(DriverKind kind);

/**
 * One piece of a piecewise driver on [t_a, t_b].
 *
 * value(t) = b for constant, b + a (t - t_a) for linear and
 * b + a sqrt(t - t_a) for sqrt_profile.
 */
struct DriverSegment {
    DriverKind kind = DriverKind::constant;
    double t_a = 0.0;
    double t_b = 1.0;
    double a = 0.0;
    double b = 0.0;

    DriverSegment() = default;
    DriverSegment(DriverKind kind, double t_a, double t_b, double a, double b);

    double duration() const { return t_b - t_a; }
    double operator()(double t) const;
    double left_value() const { return b; }
    /// Limit of the value as t -> t_b from the left.
    double right_value() const { return (*this)(t_b); }
    bool is_flat() const { return kind == DriverKind::constant || a == 0.0; }
};

/**
 * Piecewise driver built from sqrt(kappa) W.
 *
 * linear and sqrt_profile interpolate between consecutive nodes and give one
 * segment per grid interval. constant is the half-shifted step driver: value
 * sqrt(kappa) W(t_k) on [t_k - h_{k-1}/2, t_k + h_k/2), value 0 on [0, h_0/2),
 * so it has intervals + 1 segments.
 */
std::vector<DriverSegment> driver_view(const BrownianPath& path, double kappa, DriverKind kind);

/// Evaluates a tiling of segments at t (right-continuous; t = T uses the last one).
double driver_value(std::span<const DriverSegment> segments, double t);

}  // namespace sle
