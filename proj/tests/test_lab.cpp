#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sle/lab.hpp"

using namespace sle;

namespace {

Trace make_trace(std::vector<double> t, std::vector<Complex> z)
{
    std::vector<HalfPlanePoint> p;
    for (auto v : z) p.emplace_back(v);
    return Trace(std::move(t), std::move(p));
}

}  // namespace

TEST_CASE("distances on hand-made traces")
{
    const Trace a = make_trace({0.0, 1.0}, {{0.0, 1.0}, {0.0, 1.0}});
    const Trace b = make_trace({0.0, 0.5, 1.0}, {{0.0, 1.0}, {1.0, 1.0}, {0.0, 1.0}});
    CHECK(sup_distance(a, b) == doctest::Approx(1.0));
    // |a - b| is a tent of height 1: L2 = 1/sqrt(3), L4 = 1/5^(1/4)
    CHECK(lp_distance(a, b, 2.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(lp_distance(a, b, 4.0) == doctest::Approx(std::pow(0.2, 0.25)).epsilon(1e-12));
    CHECK(sup_distance(a, a) == 0.0);
    CHECK(lp_distance(a, a, 2.0) == 0.0);
}

TEST_CASE("distances agree with brute-force oracles")
{
    const auto coarse = sample_path(TimeGrid::uniform(16), 2);
    const auto fine = restrict_to(refine_all(coarse, 2), TimeGrid::uniform(64));
    const SchemeConfig config{.kappa = 2.0, .y0 = 0.1};
    const Trace a = run_nv(config, coarse);
    const Trace b = run_nv(config, fine);

    const int m = 100000;
    double sup = 0.0;
    double s2 = 0.0;
    double s4 = 0.0;
    for (int j = 0; j <= m; ++j) {
        const double t = static_cast<double>(j) / m;
        sup = std::max(sup, std::abs(a.at(t) - b.at(t)));
    }
    for (int j = 0; j < m; ++j) {
        const double t = (j + 0.5) / m;
        const double d = std::abs(a.at(t) - b.at(t));
        s2 += d * d / m;
        s4 += d * d * d * d / m;
    }
    CHECK(std::abs(sup_distance(a, b) - sup) < 1e-12);
    CHECK(std::abs(lp_distance(a, b, 2.0) - std::sqrt(s2)) < 1e-6);
    CHECK(std::abs(lp_distance(a, b, 4.0) - std::pow(s4, 0.25)) < 1e-6);

    // power means increase with p
    CHECK(lp_distance(a, b, 2.0) <= lp_distance(a, b, 3.0));
    CHECK(lp_distance(a, b, 3.0) <= lp_distance(a, b, 4.0));
    CHECK(lp_distance(a, b, 4.0) <= sup_distance(a, b));
}

TEST_CASE("distance input validation")
{
    const Trace a = make_trace({0.0, 1.0}, {{0.0, 1.0}, {0.0, 1.0}});
    const Trace c = make_trace({0.0, 2.0}, {{0.0, 1.0}, {0.0, 1.0}});
    CHECK_THROWS_AS(sup_distance(a, c), std::invalid_argument);
    CHECK_THROWS_AS(lp_distance(a, a, 1.0), std::invalid_argument);
}

TEST_CASE("method names")
{
    for (auto m : {Method::nv, Method::constant, Method::linear, Method::sqrt_profile,
                   Method::euler_reference}) {
        CHECK(parse_method(to_string(m)) == m);
    }
    CHECK_THROWS_AS(parse_method("rk45"), std::invalid_argument);
    CHECK(is_forward(Method::linear));
    CHECK_FALSE(is_forward(Method::nv));
    CHECK_FALSE(is_forward(Method::euler_reference));
}

TEST_CASE("fit_order on an exact power law")
{
    const std::vector<std::size_t> n{64, 128, 256, 512};
    std::vector<double> e;
    for (auto v : n) e.push_back(3.0 * std::pow(static_cast<double>(v), -0.5));
    const OrderFit fit = fit_order(n, e);
    CHECK(fit.order == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(fit.std_error < 1e-10);
    CHECK(fit.points == 4);

    // noisy data: band contains the order and uses t with 2 dof
    const std::vector<double> noisy{1.0, 0.6, 0.55, 0.3};
    const OrderFit f2 = fit_order(n, noisy);
    CHECK(f2.band_low < f2.order);
    CHECK(f2.band_high > f2.order);
    CHECK((f2.band_high - f2.order) / f2.std_error == doctest::Approx(4.302652729911275).epsilon(1e-9));

    const OrderFit skip = fit_order({64, 128, 256}, {0.1, 0.0, 0.025});
    CHECK(skip.points == 2);
    CHECK(skip.order == doctest::Approx(1.0));
}

TEST_CASE("validate_ladder")
{
    CHECK_NOTHROW(validate_ladder({64, 128, 1024}, 1024));
    CHECK_THROWS_AS(validate_ladder({48}, 1024), std::invalid_argument);
    CHECK_THROWS_AS(validate_ladder({2048}, 1024), std::invalid_argument);
    CHECK_THROWS_AS(validate_ladder({}, 1024), std::invalid_argument);
}

TEST_CASE("convergence study is deterministic and thread independent")
{
    StudyConfig config;
    config.seeds = {1, 2, 3};
    config.resolutions = {16, 32, 64};
    config.reference_n = 256;
    config.threads = 1;
    const StudyResult a = convergence_study(config);
    config.threads = 4;
    const StudyResult b = convergence_study(config);
    REQUIRE(a.rows.size() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(a.rows[r].n == config.resolutions[r]);
        CHECK(a.rows[r].sup_error == b.rows[r].sup_error);
        CHECK(a.rows[r].lp_error == b.rows[r].lp_error);
        CHECK(a.rows[r].sup_error > 0.0);
    }
    CHECK(a.fit.order == b.fit.order);
    // rows are medians of the per-seed errors
    std::vector<double> first;
    for (const auto& s : a.per_seed) first.push_back(s[0].sup_error);
    std::sort(first.begin(), first.end());
    CHECK(a.rows[0].sup_error == first[1]);
}

TEST_CASE("study at the reference resolution has zero error")
{
    for (auto method : {Method::nv, Method::linear}) {
        StudyConfig config;
        config.method = method;
        config.seeds = {5};
        config.resolutions = {8, 32};
        config.reference_n = 32;
        const StudyResult r = convergence_study(config);
        CHECK(r.rows[1].sup_error == 0.0);
        CHECK(r.rows[0].sup_error > 0.0);
    }
}

TEST_CASE("study forward method errors shrink with resolution")
{
    StudyConfig config;
    config.method = Method::linear;
    config.seeds = {1, 2, 3};
    config.resolutions = {8, 16, 32, 64};
    config.reference_n = 512;
    const StudyResult r = convergence_study(config);
    CHECK(r.rows.back().sup_error < r.rows.front().sup_error);
    CHECK(r.fit.order > 0.2);
}

TEST_CASE("phi1 spot values and monotonicity")
{
    BoundParams p;
    p.subpower_alpha = 0.0;
    CHECK(std::abs(phi1(16, p) - 5.245355078148851) < 1e-12);
    CHECK(std::abs(phi1(16, p) - 5.24535) < 1e-5);
    for (double alpha : {0.0, 1.0}) {
        p.subpower_alpha = alpha;
        double prev = phi1(1, p);
        for (std::size_t n = 2; n <= 100000; n = n < 1000 ? n + 1 : n * 2) {
            const double v = phi1(n, p);
            CHECK(v <= prev);
            prev = v;
        }
    }
    CHECK_THROWS_AS(phi1(0, p), std::invalid_argument);
    p.beta1 = 1.0;
    CHECK_THROWS_AS(phi1(4, p), std::invalid_argument);
}

TEST_CASE("phi2 spot value and eventual monotonicity")
{
    BoundParams p;
    p.c3 = 4.0;
    CHECK(std::abs(phi2(100, p) - 0.1743699972477976) < 1e-12);
    for (double kappa : {2.0, 4.0, 8.0}) {
        p.kappa = kappa;
        // the polynomial-times-exponential term peaks at 4n + 1 = 6 kappa
        const auto n0 = static_cast<std::size_t>(std::ceil((6.0 * kappa - 1.0) / 4.0));
        double prev = phi2(n0, p);
        for (std::size_t n = n0 + 1; n <= 20000; ++n) {
            const double v = phi2(n, p);
            CHECK(v <= prev);
            prev = v;
        }
    }
    p.eps_n = -1.0;
    CHECK_THROWS_AS(phi2(10, p), std::invalid_argument);
}

TEST_CASE("subpower")
{
    CHECK(subpower(5.0, 0.0) == 1.0);
    CHECK(subpower(0.0, 2.0) == doctest::Approx(1.0));
    CHECK(subpower(10.0, 1.0) == doctest::Approx(std::log(10.0 + std::exp(1.0))));
}

TEST_CASE("second moment statistic")
{
    const MomentStat a = second_moment_stat(6.0, 0.05, 64, 20000, 9, 1);
    const MomentStat b = second_moment_stat(6.0, 0.05, 64, 20000, 9, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.se_re == b.se_re);
    CHECK(a.samples == 20000);
    CHECK(std::abs(a.mean.real() - 1.9975) < 4.0 * a.se_re);
    CHECK(std::abs(a.mean.imag()) < 4.0 * a.se_im);
    // kappa = 4 leaves the expectation at -y0^2
    const MomentStat c = second_moment_stat(4.0, 0.3, 16, 20000, 2);
    CHECK(std::abs(c.mean.real() + 0.09) < 4.0 * c.se_re);
    CHECK_THROWS_AS(second_moment_stat(6.0, 0.05, 64, 999, 1), std::invalid_argument);
}
