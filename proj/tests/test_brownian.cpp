#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "sle/brownian.hpp"

using namespace sle;

namespace {

double variance(const std::vector<double>& v)
{
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("CounterRng is a pure function of its key")
{
    const CounterRng a(5);
    const CounterRng b(5);
    CHECK(a.normal(2, 77) == b.normal(2, 77));
    CHECK(a.normal(2, 77) != a.normal(2, 78));
    CHECK(a.normal(2, 77, 1) != a.normal(2, 77, 0));
    CHECK(CounterRng(6).normal(2, 77) != a.normal(2, 77));
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const double u = a.uniform(9, k);
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("CounterRng normals have unit variance")
{
    const CounterRng rng(11);
    std::vector<double> draws;
    for (std::uint64_t k = 0; k < 200000; ++k) draws.push_back(rng.normal(1, k));
    const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / 200000.0;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(200000.0));
    CHECK(std::abs(variance(draws) - 1.0) < 4.0 * std::sqrt(2.0 / 200000.0));
}

TEST_CASE("sample_path determinism and anchoring")
{
    const auto grid = TimeGrid::uniform(64);
    const auto p = sample_path(grid, 42);
    const auto q = sample_path(grid, 42);
    CHECK(p == q);
    CHECK(p.value(0) == 0.0);
    CHECK(p.values().size() == grid.size());
    CHECK(sample_path(grid, 43) != p);
}

TEST_CASE("sample_path endpoint variance (Monte Carlo)")
{
    const auto grid = TimeGrid::uniform(4);
    std::vector<double> end;
    const std::size_t m = 100000;
    for (std::size_t s = 0; s < m; ++s) end.push_back(sample_path(grid, s).value(4));
    const double se = std::sqrt(2.0 / static_cast<double>(m));
    CHECK(std::abs(variance(end) - 1.0) < 3.0 * se);
}

TEST_CASE("Brownian scaling: times * r^2 gives variance * r^2")
{
    const double r = 3.0;
    const auto unit = TimeGrid::uniform(8, 1.0);
    const auto scaled = TimeGrid::uniform(8, r * r);
    std::vector<double> a;
    std::vector<double> b;
    for (std::uint64_t s = 0; s < 50000; ++s) {
        a.push_back(sample_path(unit, s).value(8));
        b.push_back(sample_path(scaled, s).value(8));
    }
    CHECK(variance(b) / variance(a) == doctest::Approx(r * r).epsilon(1e-9));
    // bridge statistics after scaling
    std::vector<double> mids;
    const auto base = sample_path(TimeGrid::uniform(1, r * r), 1);
    for (std::uint64_t salt = 0; salt < 50000; ++salt) mids.push_back(refine_midpoint(base, 0, salt).value(1));
    CHECK(variance(mids) == doctest::Approx(r * r / 4.0).epsilon(0.03));
}

TEST_CASE("bridge midpoint with zero draw is the average")
{
    CHECK(bridge_midpoint(0.3, -0.7, 0.25, 0.0) == doctest::Approx(-0.2));
    CHECK(bridge_midpoint(1.0, 1.0, 4.0, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("refine_midpoint keeps existing nodes and is order independent")
{
    const auto p = sample_path(TimeGrid::uniform(8), 3);
    const auto r = refine_midpoint(p, 2);
    CHECK(r.grid().size() == 10);
    CHECK(r.grid()[3] == 0.3125);
    CHECK(restrict_to(r, p.grid()) == p);
    CHECK_THROWS_AS(refine_midpoint(p, 8), std::out_of_range);

    // node values depend on where they are, not when they were inserted
    const auto ab = refine_midpoint(refine_midpoint(p, 1), 6);  // intervals 1 then (old) 5
    const auto ba = refine_midpoint(refine_midpoint(p, 5), 1);
    CHECK(ab == ba);
}

TEST_CASE("refine_all equals repeated refine_midpoint")
{
    const auto p = sample_path(TimeGrid::uniform(4), 17);
    auto q = p;
    for (std::size_t k = 0; k < 4; ++k) q = refine_midpoint(q, 2 * k);
    CHECK(refine_all(p, 1) == q);
    const auto deep = refine_all(p, 5);
    CHECK(deep.grid().intervals() == 128);
    CHECK(restrict_to(deep, refine_all(p, 2).grid()) == refine_all(p, 2));
    CHECK(restrict_to(deep, p.grid()) == p);
}

TEST_CASE("nested refinement restricts bit-exactly (property)")
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto base = sample_path(TimeGrid::uniform(3, 2.0), seed);
        auto path = base;
        const CounterRng pick(seed);
        for (std::uint64_t step = 0; step < 10; ++step) {
            const auto k = pick.bits(5, step) % path.grid().intervals();
            path = refine_midpoint(path, k);
        }
        CHECK(path.grid().intervals() == 13);
        CHECK(restrict_to(path, base.grid()) == base);
    }
}

TEST_CASE("midpoint ensemble variance is h/4")
{
    const TimeGrid grid({0.0, 0.2, 0.7, 1.0});
    const auto p = sample_path(grid, 8);
    const double h = 0.5;
    std::vector<double> mids;
    for (std::uint64_t salt = 0; salt < 100000; ++salt) mids.push_back(refine_midpoint(p, 1, salt).value(2));
    const double mean = std::accumulate(mids.begin(), mids.end(), 0.0) / 100000.0;
    CHECK(std::abs(mean - 0.5 * (p.value(1) + p.value(2))) < 4.0 * std::sqrt(h / 4.0 / 100000.0));
    CHECK(std::abs(variance(mids) / (h / 4.0) - 1.0) < 0.05);
}

TEST_CASE("restrict_to rejects foreign nodes")
{
    const auto p = sample_path(TimeGrid::uniform(4), 1);
    CHECK_THROWS_AS(restrict_to(p, TimeGrid::uniform(3)), std::invalid_argument);
}

TEST_CASE("BrownianPath validation")
{
    CHECK_THROWS_AS(BrownianPath(TimeGrid::uniform(2), {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(BrownianPath(TimeGrid::uniform(1), {0.5, 1.0}), std::invalid_argument);
}

TEST_CASE("driver_view linear and sqrt interpolate the nodes")
{
    const auto p = sample_path(TimeGrid::uniform(16), 5);
    const double kappa = 8.0 / 3.0;
    for (auto kind : {DriverKind::linear, DriverKind::sqrt_profile}) {
        const auto segs = driver_view(p, kappa, kind);
        REQUIRE(segs.size() == 16);
        for (std::size_t k = 0; k < 16; ++k) {
            CHECK(segs[k].left_value() == doctest::Approx(std::sqrt(kappa) * p.value(k)));
            CHECK(segs[k].right_value() == doctest::Approx(std::sqrt(kappa) * p.value(k + 1)));
            // continuity at the node shared with the next segment
            if (k + 1 < 16) {
                CHECK(segs[k].right_value() == doctest::Approx(segs[k + 1].left_value()).epsilon(1e-14));
            }
        }
    }
    const auto lin = driver_view(p, kappa, DriverKind::linear);
    const double mid = 0.5 * (p.grid()[3] + p.grid()[4]);
    CHECK(lin[3](mid) == doctest::Approx(0.5 * std::sqrt(kappa) * (p.value(3) + p.value(4))));
    CHECK(driver_value(lin, p.grid()[5]) == doctest::Approx(std::sqrt(kappa) * p.value(5)));
    CHECK(driver_value(lin, 1.0) == doctest::Approx(std::sqrt(kappa) * p.value(16)));
}

TEST_CASE("driver_view constant is the half-shifted step driver")
{
    const TimeGrid grid({0.0, 0.2, 0.6, 1.0});
    const BrownianPath p(grid, {0.0, 0.5, -1.0, 2.0}, 0);
    const auto segs = driver_view(p, 4.0, DriverKind::constant);
    REQUIRE(segs.size() == 4);
    CHECK(segs[0].t_a == 0.0);
    CHECK(segs[0].t_b == doctest::Approx(0.1));
    CHECK(segs[0].b == 0.0);
    CHECK(segs[1].t_a == doctest::Approx(0.1));
    CHECK(segs[1].t_b == doctest::Approx(0.4));
    CHECK(segs[1].b == doctest::Approx(1.0));
    CHECK(segs[2].t_b == doctest::Approx(0.8));
    CHECK(segs[2].b == doctest::Approx(-2.0));
    CHECK(segs[3].t_b == 1.0);
    CHECK(segs[3].b == doctest::Approx(4.0));
    CHECK(driver_value(segs, 0.05) == 0.0);
    CHECK(driver_value(segs, 0.1) == doctest::Approx(1.0));  // right-continuous
    CHECK(driver_value(segs, 0.6) == doctest::Approx(-2.0));
}

TEST_CASE("driver_view rejects non-positive kappa")
{
    const auto p = sample_path(TimeGrid::uniform(2), 1);
    CHECK_THROWS_AS(driver_view(p, 0.0, DriverKind::linear), std::invalid_argument);
    CHECK_THROWS_AS(driver_view(p, -1.0, DriverKind::constant), std::invalid_argument);
}

TEST_CASE("path CSV")
{
    const BrownianPath p(TimeGrid({0.0, 0.5, 1.0}), {0.0, 0.25, -0.1}, 0);
    std::ostringstream os;
    write_csv(os, p);
    CHECK(os.str() == "t,w\n0,0\n0.5,0.25\n1,-0.10000000000000001\n");
}
