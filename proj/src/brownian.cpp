#include "sle/brownian.hpp"

#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "sle/format.hpp"

namespace sle {

namespace {

constexpr std::uint64_t kIncrementStream = 0x1;
constexpr std::uint64_t kBridgeStream = 0x2;
constexpr std::uint64_t kDeriveStream = 0x3;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t key, std::uint64_t salt) const
{
    std::uint64_t h = mix64(seed_);
    h = mix64(h ^ stream);
    h = mix64(h ^ key);
    h = mix64(h ^ salt);
    return h;
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t key, std::uint64_t salt) const
{
    return (static_cast<double>(bits(stream, key, salt) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t key, std::uint64_t salt) const
{
    const double u = uniform(stream, key, salt);
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

std::uint64_t CounterRng::derive(std::uint64_t index) const
{
    return bits(kDeriveStream, index);
}

BrownianPath::BrownianPath(TimeGrid grid, std::vector<double> values, std::uint64_t seed)
    : grid_(std::move(grid)), values_(std::move(values)), seed_(seed)
{
    if (values_.size() != grid_.size()) {
        throw std::invalid_argument("BrownianPath: value count differs from grid size");
    }
    if (values_.front() != 0.0) throw std::invalid_argument("BrownianPath: W(0) must be 0");
    for (double w : values_) {
        if (!std::isfinite(w)) throw std::invalid_argument("BrownianPath: non-finite value");
    }
}

BrownianPath sample_path(const TimeGrid& grid, std::uint64_t seed)
{
    const CounterRng rng(seed);
    std::vector<double> w(grid.size(), 0.0);
    for (std::size_t k = 0; k < grid.intervals(); ++k) {
        w[k + 1] = w[k] + std::sqrt(grid.step(k)) * rng.normal(kIncrementStream, k);
    }
    return BrownianPath(grid, std::move(w), seed);
}

BrownianPath zero_path(const TimeGrid& grid)
{
    return BrownianPath(grid, std::vector<double>(grid.size(), 0.0), 0);
}

double bridge_midpoint(double w_left, double w_right, double h, double normal)
{
    return 0.5 * (w_left + w_right) + 0.5 * std::sqrt(h) * normal;
}

double bridge_draw(std::uint64_t seed, double t_left, double w_left, double t_right, double w_right,
                   std::uint64_t salt)
{
    const double mid = 0.5 * (t_left + t_right);
    const double xi = CounterRng(seed).normal(kBridgeStream, std::bit_cast<std::uint64_t>(mid), salt);
    return bridge_midpoint(w_left, w_right, t_right - t_left, xi);
}

BrownianPath refine_midpoint(const BrownianPath& path, std::size_t k, std::uint64_t salt)
{
    const auto& grid = path.grid();
    if (k >= grid.intervals()) {
        throw std::out_of_range("refine_midpoint: interval index " + std::to_string(k) +
                                " out of range");
    }
    const double mid = 0.5 * (grid[k] + grid[k + 1]);
    if (!(mid > grid[k] && mid < grid[k + 1])) {
        throw std::invalid_argument("refine_midpoint: interval too short to bisect");
    }
    std::vector<double> t(grid.times().begin(), grid.times().end());
    std::vector<double> w(path.values().begin(), path.values().end());
    const double wm = bridge_draw(path.seed(), grid[k], w[k], grid[k + 1], w[k + 1], salt);
    t.insert(t.begin() + static_cast<std::ptrdiff_t>(k + 1), mid);
    w.insert(w.begin() + static_cast<std::ptrdiff_t>(k + 1), wm);
    return BrownianPath(TimeGrid(std::move(t)), std::move(w), path.seed());
}

BrownianPath refine_all(const BrownianPath& path, unsigned levels)
{
    std::vector<double> t(path.grid().times().begin(), path.grid().times().end());
    std::vector<double> w(path.values().begin(), path.values().end());
    for (unsigned level = 0; level < levels; ++level) {
        std::vector<double> tn;
        std::vector<double> wn;
        tn.reserve(2 * t.size() - 1);
        wn.reserve(2 * t.size() - 1);
        for (std::size_t k = 0; k + 1 < t.size(); ++k) {
            tn.push_back(t[k]);
            wn.push_back(w[k]);
            tn.push_back(0.5 * (t[k] + t[k + 1]));
            wn.push_back(bridge_draw(path.seed(), t[k], w[k], t[k + 1], w[k + 1]));
        }
        tn.push_back(t.back());
        wn.push_back(w.back());
        t = std::move(tn);
        w = std::move(wn);
    }
    return BrownianPath(TimeGrid(std::move(t)), std::move(w), path.seed());
}

BrownianPath restrict_to(const BrownianPath& path, const TimeGrid& coarse)
{
    const auto fine = path.grid().times();
    std::vector<double> w;
    w.reserve(coarse.size());
    std::size_t j = 0;
    for (double t : coarse.times()) {
        while (j < fine.size() && fine[j] < t) ++j;
        if (j == fine.size() || fine[j] != t) {
            throw std::invalid_argument("restrict_to: coarse node is not a node of the path");
        }
        w.push_back(path.value(j));
    }
    return BrownianPath(coarse, std::move(w), path.seed());
}

void write_csv(std::ostream& out, const BrownianPath& path)
{
    out << "t,w\n";
    for (std::size_t k = 0; k < path.grid().size(); ++k) {
        out << format_real(path.grid()[k]) << ',' << format_real(path.value(k)) << '\n';
    }
}

const char* to_string(DriverKind kind)
{
    switch (kind) {
    case DriverKind::constant: return "constant";
    case DriverKind::linear: return "linear";
    case DriverKind::sqrt_profile: return "sqrt";
    }
    return "unknown";
}

DriverSegment::DriverSegment(DriverKind kind_, double t_a_, double t_b_, double a_, double b_)
    : kind(kind_), t_a(t_a_), t_b(t_b_), a(a_), b(b_)
{
    if (!(t_a < t_b)) throw std::invalid_argument("DriverSegment: empty interval");
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw std::invalid_argument("DriverSegment: non-finite coefficient");
    }
}

double DriverSegment::operator()(double t) const
{
    switch (kind) {
    case DriverKind::constant: return b;
    case DriverKind::linear: return b + a * (t - t_a);
    case DriverKind::sqrt_profile: return b + a * std::sqrt(std::max(t - t_a, 0.0));
    }
    return b;
}

std::vector<DriverSegment> driver_view(const BrownianPath& path, double kappa, DriverKind kind)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("driver_view: kappa must be positive");
    }
    const double root_kappa = std::sqrt(kappa);
    const auto& grid = path.grid();
    const std::size_t n = grid.intervals();
    std::vector<DriverSegment> out;

    if (kind == DriverKind::constant) {
        out.reserve(n + 1);
        out.emplace_back(kind, 0.0, grid[0] + 0.5 * grid.step(0), 0.0, 0.0);
        for (std::size_t k = 1; k <= n; ++k) {
            const double lo = grid[k] - 0.5 * grid.step(k - 1);
            const double hi = k < n ? grid[k] + 0.5 * grid.step(k) : grid.horizon();
            out.emplace_back(kind, lo, hi, 0.0, root_kappa * path.value(k));
        }
        return out;
    }

    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double left = root_kappa * path.value(k);
        const double rise = root_kappa * path.increment(k);
        const double h = grid.step(k);
        const double slope = kind == DriverKind::linear ? rise / h : rise / std::sqrt(h);
        out.emplace_back(kind, grid[k], grid[k + 1], slope, left);
    }
    return out;
}

double driver_value(std::span<const DriverSegment> segments, double t)
{
    if (segments.empty()) throw std::invalid_argument("driver_value: no segments");
    if (t < segments.front().t_a || t > segments.back().t_b) {
        throw std::out_of_range("driver_value: time outside the driver's span");
    }
    std::size_t lo = 0;
    std::size_t hi = segments.size();
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (segments[mid].t_a <= t) lo = mid; else hi = mid;
    }
    return segments[lo](t);
}

}  // namespace sle
