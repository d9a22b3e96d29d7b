#include "sle/halfplane.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sle {

HalfPlanePoint::HalfPlanePoint(double re, double im) : re_(re), im_(im)
{
    if (!std::isfinite(re) || !std::isfinite(im)) {
        throw std::invalid_argument("HalfPlanePoint: non-finite coordinate");
    }
    if (im < 0.0) {
        std::ostringstream msg;
        msg << "HalfPlanePoint: negative imaginary part " << im;
        throw std::invalid_argument(msg.str());
    }
    if (im_ == 0.0) im_ = 0.0;  // drop a negative zero
}

void require_interior(Complex z, const char* where)
{
    if (!(z.imag() > 0.0)) {
        std::ostringstream msg;
        msg << where << ": state " << z << " is not interior to the upper half-plane";
        throw BoundaryStateError(msg.str());
    }
}

Complex sqrt_upper(Complex z)
{
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw std::invalid_argument("sqrt_upper: non-finite input");
    }
    // std::sqrt is the principal root (half-angle of arg in (-pi, pi]); the
    // reflection w -> -w moves it onto Im >= 0 without touching [0, inf).
    Complex w = std::sqrt(z);
    if (w.imag() < 0.0 || (w.imag() == 0.0 && w.real() < 0.0)) w = -w;
    if (w.imag() == 0.0) w.imag(0.0);
    return w;
}

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times))
{
    if (times_.size() < 2) throw std::invalid_argument("TimeGrid: need at least two nodes");
    if (times_.front() != 0.0) throw std::invalid_argument("TimeGrid: first node must be 0");
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
        if (!std::isfinite(times_[k + 1]) || !(times_[k + 1] > times_[k])) {
            throw std::invalid_argument("TimeGrid: nodes must be finite and strictly increasing");
        }
    }
}

TimeGrid TimeGrid::uniform(std::size_t intervals, double horizon)
{
    if (intervals == 0) throw std::invalid_argument("TimeGrid::uniform: zero intervals");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("TimeGrid::uniform: horizon must be positive");
    }
    std::vector<double> t(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) {
        t[k] = horizon * static_cast<double>(k) / static_cast<double>(intervals);
    }
    t.back() = horizon;
    return TimeGrid(std::move(t));
}

double TimeGrid::mesh() const
{
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) m = std::max(m, step(k));
    return m;
}

std::size_t TimeGrid::locate(double t) const
{
    if (!(t >= 0.0 && t <= horizon())) {
        std::ostringstream msg;
        msg << "TimeGrid::locate: t = " << t << " outside [0, " << horizon() << "]";
        throw std::out_of_range(msg.str());
    }
    if (t == horizon()) return intervals() - 1;
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(it - times_.begin()) - 1;
}

Trace::Trace(std::vector<double> times, std::vector<HalfPlanePoint> points)
    : times_(std::move(times)), points_(std::move(points))
{
    if (times_.size() != points_.size()) {
        throw std::invalid_argument("Trace: times and points differ in length");
    }
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
        if (!(times_[k + 1] > times_[k])) {
            throw std::invalid_argument("Trace: times must be strictly increasing");
        }
    }
}

Complex Trace::at(double t) const
{
    if (empty()) throw std::logic_error("Trace::at: empty trace");
    if (t <= times_.front()) return points_.front();
    if (t >= times_.back()) return points_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
    return (1.0 - w) * points_[k].value() + w * points_[k + 1].value();
}

}  // namespace sle
