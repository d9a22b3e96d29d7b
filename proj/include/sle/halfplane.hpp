#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sle {

using Complex = std::complex<double>;

/// Raised when an interior-only operation receives a point on the real axis.
class BoundaryStateError : public std::domain_error {
public:
    explicit BoundaryStateError(const std::string& what) : std::domain_error(what) {}
};

/**
 * A point of the closed upper half-plane.
 *
 * Both coordinates are finite and the imaginary part is non-negative; the
 * constructor enforces this. Every Loewner state in the library is stored as
 * one of these.
 */
class HalfPlanePoint {
public:
    HalfPlanePoint() = default;
    HalfPlanePoint(double re, double im);
    explicit HalfPlanePoint(Complex z) : HalfPlanePoint(z.real(), z.imag()) {}

    double re() const { return re_; }
    double im() const { return im_; }
    bool interior() const { return im_ > 0.0; }
    Complex value() const { return {re_, im_}; }
    operator Complex() const { return value(); }

    friend bool operator==(const HalfPlanePoint&, const HalfPlanePoint&) = default;

private:
    double re_ = 0.0;
    double im_ = 0.0;
};

/// Throws BoundaryStateError unless Im(z) > 0.
void require_interior(Complex z, const char* where);

/**
 * Square root on the upper-half-plane branch.
 *
 * Returns w with w*w == z and Im(w) >= 0. On the cut z in [0, inf) both roots
 * are real and the non-negative one is returned. Throws std::invalid_argument
 * for non-finite input.
 */
Complex sqrt_upper(Complex z);

/// Strictly increasing partition 0 = t_0 < t_1 < ... < t_n = T.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> times);

    static TimeGrid uniform(std::size_t intervals, double horizon = 1.0);

    std::size_t intervals() const { return times_.size() - 1; }
    std::size_t size() const { return times_.size(); }
    double horizon() const { return times_.back(); }
    double operator[](std::size_t k) const { return times_[k]; }
    double step(std::size_t k) const { return times_[k + 1] - times_[k]; }
    std::span<const double> times() const { return times_; }

    /// Largest interval length.
    double mesh() const;

    /// Index k with t_k <= t < t_{k+1}; t == T maps to the last interval.
    std::size_t locate(double t) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::vector<double> times_{0.0, 1.0};
};

/// Parallel arrays of strictly increasing times and half-plane points.
class Trace {
public:
    Trace() = default;
    Trace(std::vector<double> times, std::vector<HalfPlanePoint> points);

    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    std::span<const double> times() const { return times_; }
    std::span<const HalfPlanePoint> points() const { return points_; }
    double time(std::size_t k) const { return times_[k]; }
    const HalfPlanePoint& point(std::size_t k) const { return points_[k]; }
    const HalfPlanePoint& back() const { return points_.back(); }

    /// Piecewise-linear interpolation in time; t is clamped to the trace span.
    Complex at(double t) const;

    friend bool operator==(const Trace&, const Trace&) = default;

private:
    std::vector<double> times_;
    std::vector<HalfPlanePoint> points_;
};

}  // namespace sle
