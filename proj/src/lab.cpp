#include "sle/lab.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "sle/parallel.hpp"

namespace sle {

namespace {

std::vector<double> union_grid(const Trace& a, const Trace& b)
{
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("trace distance: traces too short");
    const double scale = std::max(std::abs(a.times().back()), 1.0);
    if (std::abs(a.times().front() - b.times().front()) > 1e-12 * scale ||
        std::abs(a.times().back() - b.times().back()) > 1e-12 * scale) {
        throw std::invalid_argument("trace distance: traces span different horizons");
    }
    std::vector<double> t;
    t.reserve(a.size() + b.size());
    std::merge(a.times().begin(), a.times().end(), b.times().begin(), b.times().end(),
               std::back_inserter(t));
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

double sup_distance(const Trace& a, const Trace& b)
{
    double best = 0.0;
    for (double t : union_grid(a, b)) best = std::max(best, std::abs(a.at(t) - b.at(t)));
    return best;
}

double lp_distance(const Trace& a, const Trace& b, double p)
{
    if (!(p >= 2.0) || !std::isfinite(p)) throw std::invalid_argument("lp_distance: need p >= 2");
    const auto t = union_grid(a, b);
    // |a - b|^2 is quadratic on each union interval, so even p up to 14 is exact.
    using Rule = boost::math::quadrature::gauss<double, 15>;
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const double lo = t[k];
        const double hi = t[k + 1];
        const Complex da = a.at(lo) - b.at(lo);
        const Complex db = a.at(hi) - b.at(hi);
        integral += Rule::integrate(
            [&](double s) { return std::pow(std::abs(da + (db - da) * s), p); }, 0.0, 1.0) *
                    (hi - lo);
    }
    const double span = t.back() - t.front();
    return std::pow(integral / span, 1.0 / p);
}

const char* to_string(Method method)
{
    switch (method) {
    case Method::nv: return "nv";
    case Method::constant: return "constant";
    case Method::linear: return "linear";
    case Method::sqrt_profile: return "sqrt";
    case Method::euler_reference: return "euler-ref";
    }
    return "unknown";
}

Method parse_method(const std::string& name)
{
    if (name == "nv") return Method::nv;
    if (name == "constant") return Method::constant;
    if (name == "linear") return Method::linear;
    if (name == "sqrt") return Method::sqrt_profile;
    if (name == "euler-ref") return Method::euler_reference;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

bool is_forward(Method method)
{
    return method == Method::constant || method == Method::linear ||
           method == Method::sqrt_profile;
}

OrderFit fit_order(const std::vector<std::size_t>& n, const std::vector<double>& error)
{
    if (n.size() != error.size()) throw std::invalid_argument("fit_order: length mismatch");
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (error[i] > 0.0) {
            x.push_back(std::log(static_cast<double>(n[i])));
            y.push_back(std::log(error[i]));
        }
    }
    OrderFit fit;
    fit.points = x.size();
    if (x.size() < 2) return fit;

    const double m = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    fit.intercept = my - slope * mx;
    fit.order = -slope;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + slope * x[i]);
        fit.residuals.push_back(r);
        rss += r * r;
    }
    fit.band_low = fit.band_high = fit.order;
    if (x.size() > 2) {
        fit.std_error = std::sqrt(rss / (m - 2.0) / sxx);
        const boost::math::students_t dist(m - 2.0);
        const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
        fit.band_low = fit.order - q * fit.std_error;
        fit.band_high = fit.order + q * fit.std_error;
    }
    return fit;
}

Trace run_method(Method method, double kappa, double y0, const BrownianPath& path,
                 const IntegratorOptions& integrator)
{
    SchemeConfig config;
    config.kappa = kappa;
    config.y0 = y0;
    config.horizon = path.grid().horizon();
    switch (method) {
    case Method::nv: return run_nv(config, path);
    case Method::euler_reference: return run_euler_reference(config, path);
    case Method::constant:
        return trace_interpolated_driver(path, kappa, DriverKind::constant, integrator);
    case Method::linear:
        return trace_interpolated_driver(path, kappa, DriverKind::linear, integrator);
    case Method::sqrt_profile:
        return trace_interpolated_driver(path, kappa, DriverKind::sqrt_profile, integrator);
    }
    throw std::invalid_argument("run_method: unknown method");
}

void validate_ladder(const std::vector<std::size_t>& resolutions, std::size_t reference_n)
{
    if (resolutions.empty()) throw std::invalid_argument("study: empty resolution ladder");
    if (reference_n == 0) throw std::invalid_argument("study: reference resolution must be positive");
    for (std::size_t n : resolutions) {
        if (n == 0 || n > reference_n) {
            throw std::invalid_argument("study: resolution " + std::to_string(n) +
                                        " exceeds the reference " + std::to_string(reference_n));
        }
        if (reference_n % n != 0 || !std::has_single_bit(reference_n / n)) {
            throw std::invalid_argument("study: resolution " + std::to_string(n) +
                                        " is not nested dyadically in the reference " +
                                        std::to_string(reference_n));
        }
    }
}

StudyResult convergence_study(const StudyConfig& config)
{
    validate_ladder(config.resolutions, config.reference_n);
    if (config.seeds.empty()) throw std::invalid_argument("study: no seeds");
    if (!(config.kappa > 0.0)) throw std::invalid_argument("study: kappa must be positive");
    for (double p : config.lp_orders) {
        if (!(p >= 2.0)) throw std::invalid_argument("study: L^p orders must be >= 2");
    }

    const std::size_t coarsest =
        *std::min_element(config.resolutions.begin(), config.resolutions.end());
    const auto levels = static_cast<unsigned>(std::countr_zero(config.reference_n / coarsest));
    auto y0_for = [&](std::size_t n) { return config.y0 ? *config.y0 : auto_y0(n); };

    StudyResult result;
    result.per_seed.resize(config.seeds.size());
    parallel_for(config.seeds.size(), config.threads, [&](std::size_t s) {
        const auto base = sample_path(TimeGrid::uniform(coarsest), config.seeds[s]);
        const auto fine = refine_all(base, levels);
        const Trace reference = run_method(config.method, config.kappa, y0_for(config.reference_n),
                                           fine, config.integrator);
        auto& rows = result.per_seed[s];
        for (std::size_t n : config.resolutions) {
            const auto path = restrict_to(fine, TimeGrid::uniform(n));
            const auto start = std::chrono::steady_clock::now();
            const Trace trace = run_method(config.method, config.kappa, y0_for(n), path,
                                           config.integrator);
            const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
            ErrorReport row;
            row.n = n;
            row.sup_error = sup_distance(trace, reference);
            for (double p : config.lp_orders) row.lp_error[p] = lp_distance(trace, reference, p);
            row.wall_seconds = took.count();
            rows.push_back(std::move(row));
        }
    });

    std::vector<std::size_t> ns;
    std::vector<double> medians;
    for (std::size_t r = 0; r < config.resolutions.size(); ++r) {
        ErrorReport row;
        row.n = config.resolutions[r];
        std::vector<double> sup;
        std::vector<double> secs;
        std::map<double, std::vector<double>> lp;
        for (const auto& seed_rows : result.per_seed) {
            sup.push_back(seed_rows[r].sup_error);
            secs.push_back(seed_rows[r].wall_seconds);
            for (const auto& [p, v] : seed_rows[r].lp_error) lp[p].push_back(v);
        }
        row.sup_error = median(sup);
        row.wall_seconds = median(secs);
        for (auto& [p, v] : lp) row.lp_error[p] = median(v);
        ns.push_back(row.n);
        medians.push_back(row.sup_error);
        result.rows.push_back(std::move(row));
    }
    result.fit = fit_order(ns, medians);
    return result;
}

void BoundParams::validate() const
{
    auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!open_unit(beta1)) throw std::invalid_argument("beta1 must lie in (0, 1)");
    if (!open_unit(eps0)) throw std::invalid_argument("eps0 must lie in (0, 1)");
    if (!(subpower_alpha >= 0.0)) throw std::invalid_argument("subpower alpha must be >= 0");
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    if (!(eps_n >= 0.0)) throw std::invalid_argument("eps_n must be >= 0");
    if (!(c2 > 0.0 && c3 > 0.0 && c4 > 0.0)) throw std::invalid_argument("c2, c3, c4 must be positive");
}

double subpower(double x, double alpha)
{
    if (alpha == 0.0) return 1.0;
    return std::pow(std::log(x + std::numbers::e), alpha);
}

double phi1(std::size_t n, const BoundParams& params)
{
    params.validate();
    if (n == 0) throw std::invalid_argument("phi1: n must be >= 1");
    const double x = static_cast<double>(n);
    const double b = params.beta1;
    return 2.0 * subpower(std::sqrt(x), params.subpower_alpha) /
               ((1.0 - b) * std::pow(x, (1.0 - b) / 2.0)) +
           3.0 / std::pow(x, (1.0 - params.eps0) / 4.0) + 1.0 / std::sqrt(4.0 * x + 1.0) +
           2.0 / std::sqrt(x) + 1.0 / std::pow(x, 0.25);
}

double phi2(std::size_t n, const BoundParams& params)
{
    params.validate();
    if (n == 0) throw std::invalid_argument("phi2: n must be >= 1");
    const double x = static_cast<double>(n);
    const double m = 4.0 * x + 1.0;
    const double k = params.kappa;
    return 1.0 / x + params.c2 / (x * x) + params.c4 / std::pow(x, params.c3 / 2.0) +
           2.0 * m * m * m * std::exp(-m / (2.0 * k)) + 2.0 * std::exp(-std::sqrt(x) / (2.0 * k)) +
           3.0 * params.eps_n;
}

MomentStat second_moment_stat(double kappa, double y0, std::size_t n, std::size_t samples,
                              std::uint64_t seed, unsigned threads)
{
    if (samples < 1000) throw std::invalid_argument("second_moment_stat: need at least 1000 samples");
    SchemeConfig config;
    config.kappa = kappa;
    config.y0 = y0;
    config.validate();
    const TimeGrid grid = TimeGrid::uniform(n);
    const CounterRng rng(seed);

    // Fixed-size blocks reduced in order keep the sums independent of the worker count.
    constexpr std::size_t kBlock = 4096;
    const std::size_t blocks = (samples + kBlock - 1) / kBlock;
    struct Sums {
        double re = 0.0, im = 0.0, re2 = 0.0, im2 = 0.0;
    };
    std::vector<Sums> partial(blocks);
    parallel_for(blocks, threads, [&](std::size_t b) {
        Sums s;
        const std::size_t end = std::min(samples, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) {
            const auto path = sample_path(grid, rng.derive(i));
            Complex z(0.0, y0);
            for (std::size_t k = 0; k < grid.intervals(); ++k) {
                z = nv_step(HalfPlanePoint(z), grid.step(k), path.increment(k), kappa);
            }
            const Complex sq = z * z;
            s.re += sq.real();
            s.im += sq.imag();
            s.re2 += sq.real() * sq.real();
            s.im2 += sq.imag() * sq.imag();
        }
        partial[b] = s;
    });

    Sums total;
    for (const auto& s : partial) {
        total.re += s.re;
        total.im += s.im;
        total.re2 += s.re2;
        total.im2 += s.im2;
    }
    const double m = static_cast<double>(samples);
    MomentStat out;
    out.samples = samples;
    out.mean = Complex(total.re / m, total.im / m);
    const double var_re = (total.re2 - m * out.mean.real() * out.mean.real()) / (m - 1.0);
    const double var_im = (total.im2 - m * out.mean.imag() * out.mean.imag()) / (m - 1.0);
    out.se_re = std::sqrt(std::max(var_re, 0.0) / m);
    out.se_im = std::sqrt(std::max(var_im, 0.0) / m);
    return out;
}

}  // namespace sle
