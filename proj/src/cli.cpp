#include "sle/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "sle/brownian.hpp"
#include "sle/format.hpp"
#include "sle/lab.hpp"
#include "sle/loewner.hpp"
#include "sle/nv.hpp"

namespace sle::cli {

using nlohmann::json;

json RunManifest::to_json() const
{
    json j;
    j["command"] = command;
    j["kappa"] = kappa;
    j["n"] = n;
    j["seed"] = seed;
    j["seeds"] = seeds;
    j["y0"] = y0;
    j["scheme"] = scheme;
    j["against"] = against;
    j["tol"] = tol ? json(*tol) : json(nullptr);
    j["max_depth"] = max_depth;
    j["zero_noise"] = zero_noise;
    j["ladder"] = ladder;
    j["ref_n"] = ref_n;
    j["p"] = p;
    j["samples"] = samples;
    j["bound_n"] = bound_n;
    j["phi1"] = phi1;
    j["phi2"] = phi2;
    j["beta1"] = beta1;
    j["eps0"] = eps0;
    j["alpha"] = alpha;
    j["c2"] = c2;
    j["c3"] = c3;
    j["c4"] = c4;
    j["eps_n"] = eps_n;
    j["substeps"] = substeps;
    j["rel_move"] = rel_move;
    j["timing"] = timing;
    j["out"] = out;
    j["format"] = format;
    j["threads"] = threads;
    return j;
}

RunManifest RunManifest::from_json(const json& src)
{
    const json& j = src.contains("manifest") ? src.at("manifest") : src;
    RunManifest m;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("command", m.command);
    get("kappa", m.kappa);
    get("n", m.n);
    get("seed", m.seed);
    get("seeds", m.seeds);
    get("y0", m.y0);
    get("scheme", m.scheme);
    get("against", m.against);
    if (j.contains("tol") && !j.at("tol").is_null()) m.tol = j.at("tol").get<double>();
    get("max_depth", m.max_depth);
    get("zero_noise", m.zero_noise);
    get("ladder", m.ladder);
    get("ref_n", m.ref_n);
    get("p", m.p);
    get("samples", m.samples);
    get("bound_n", m.bound_n);
    get("phi1", m.phi1);
    get("phi2", m.phi2);
    get("beta1", m.beta1);
    get("eps0", m.eps0);
    get("alpha", m.alpha);
    get("c2", m.c2);
    get("c3", m.c3);
    get("c4", m.c4);
    get("eps_n", m.eps_n);
    get("substeps", m.substeps);
    get("rel_move", m.rel_move);
    get("timing", m.timing);
    get("out", m.out);
    get("format", m.format);
    get("threads", m.threads);
    return m;
}

std::vector<std::uint64_t> parse_list(const std::string& text)
{
    std::vector<std::uint64_t> out;
    const auto dots = text.find("..");
    try {
        if (dots != std::string::npos) {
            const auto lo = std::stoull(text.substr(0, dots));
            const auto hi = std::stoull(text.substr(dots + 2));
            if (hi < lo) throw UsageError("empty range '" + text + "'");
            for (auto v = lo; v <= hi; ++v) out.push_back(v);
            return out;
        }
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) out.push_back(std::stoull(item));
        }
    } catch (const std::logic_error&) {
        throw UsageError("cannot parse integer list '" + text + "'");
    }
    if (out.empty()) throw UsageError("empty integer list");
    return out;
}

namespace {

/// "64..4096" doubles from 64 to 4096; otherwise a comma list.
std::vector<std::size_t> parse_ladder(const std::string& text)
{
    const auto dots = text.find("..");
    std::vector<std::size_t> out;
    if (dots != std::string::npos) {
        std::size_t lo = 0;
        std::size_t hi = 0;
        try {
            lo = std::stoull(text.substr(0, dots));
            hi = std::stoull(text.substr(dots + 2));
        } catch (const std::logic_error&) {
            throw UsageError("cannot parse ladder '" + text + "'");
        }
        if (lo == 0 || hi < lo) throw UsageError("bad ladder range '" + text + "'");
        for (std::size_t v = lo; v <= hi; v *= 2) out.push_back(v);
        if (out.back() != hi) throw UsageError("ladder range end is not a doubling of its start");
        return out;
    }
    for (auto v : parse_list(text)) out.push_back(static_cast<std::size_t>(v));
    return out;
}

double resolve_y0(const RunManifest& m, std::size_t n)
{
    if (m.y0 == "auto") return auto_y0(n);
    try {
        std::size_t used = 0;
        const double v = std::stod(m.y0, &used);
        if (used != m.y0.size()) throw std::invalid_argument("trailing text");
        if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("--y0 must be positive");
        return v;
    } catch (const std::logic_error&) {
        throw UsageError("--y0 must be a number or 'auto'");
    }
}

Method method_of(const std::string& name)
{
    try {
        return parse_method(name);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

IntegratorOptions integrator_of(const RunManifest& m)
{
    if (m.substeps < 1) throw UsageError("--substeps must be >= 1");
    if (!(m.rel_move > 0.0)) throw UsageError("--rel-move must be positive");
    return IntegratorOptions{m.substeps, m.rel_move};
}

BoundParams bounds_of(const RunManifest& m)
{
    BoundParams b;
    b.beta1 = m.beta1;
    b.eps0 = m.eps0;
    b.subpower_alpha = m.alpha;
    b.kappa = m.kappa;
    b.eps_n = m.eps_n;
    b.c2 = m.c2;
    b.c3 = m.c3;
    b.c4 = m.c4;
    try {
        b.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return b;
}

void check_kappa(const RunManifest& m, std::ostream& log)
{
    if (!(m.kappa > 0.0) || !std::isfinite(m.kappa)) throw UsageError("--kappa must be positive");
    if (m.kappa == 8.0) {
        log << "warning: kappa = 8 lies outside the convergence theory; the schemes still run\n";
    }
}

/// Destination for the primary output: the given stream for "-", else a file.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path), stream_(&fallback)
    {
        if (path != "-") {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw std::runtime_error("cannot open output file '" + path + "'");
            stream_ = &file_;
        }
    }
    std::ostream& stream() { return *stream_; }
    bool is_file() const { return path_ != "-"; }
    void close()
    {
        if (!is_file()) return;
        file_.close();
        if (!file_) throw std::runtime_error("failed writing '" + path_ + "'");
    }

private:
    std::string path_;
    std::ofstream file_;
    std::ostream* stream_;
};

void write_sidecar(const RunManifest& m, const json& summary)
{
    if (m.out == "-" || m.format != "csv") return;
    const std::string path = m.out + ".json";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open sidecar '" + path + "'");
    f << json{{"manifest", m.to_json()}, {"summary", summary}}.dump(2) << '\n';
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

void emit_trace(const RunManifest& m, const Trace& trace, json summary, std::ostream& out)
{
    Sink sink(m.out, out);
    auto& s = sink.stream();
    if (m.format == "json") {
        json j{{"manifest", m.to_json()}, {"summary", summary}};
        std::vector<double> t(trace.times().begin(), trace.times().end());
        std::vector<double> re;
        std::vector<double> im;
        for (const auto& p : trace.points()) {
            re.push_back(p.re());
            im.push_back(p.im());
        }
        j["t"] = t;
        j["re"] = re;
        j["im"] = im;
        s << j.dump(2) << '\n';
    } else {
        s << "t,re,im\n";
        for (std::size_t k = 0; k < trace.size(); ++k) {
            s << format_real(trace.time(k)) << ',' << format_real(trace.point(k).re()) << ','
              << format_real(trace.point(k).im()) << '\n';
        }
    }
    sink.close();
    write_sidecar(m, summary);
}

BrownianPath input_path(const RunManifest& m)
{
    if (m.n == 0) throw UsageError("--n must be positive");
    const TimeGrid grid = TimeGrid::uniform(m.n);
    return m.zero_noise ? zero_path(grid) : sample_path(grid, m.seed);
}

void cmd_trace(const RunManifest& m, std::ostream& out, std::ostream& log)
{
    check_kappa(m, log);
    const Method method = method_of(m.scheme);
    const BrownianPath path = input_path(m);
    json summary;
    Trace trace;
    if (is_forward(method)) {
        if (m.tol) throw UsageError("--tol applies to the nv scheme only");
        trace = run_method(method, m.kappa, 1.0, path, integrator_of(m));
    } else {
        const double y0 = resolve_y0(m, m.n);
        summary["y0"] = y0;
        if (m.tol) {
            if (method != Method::nv) throw UsageError("--tol applies to the nv scheme only");
            if (!(*m.tol > 0.0)) throw UsageError("--tol must be positive");
            if (m.max_depth < 0) throw UsageError("--max-depth must be >= 0");
            SchemeConfig config;
            config.kappa = m.kappa;
            config.y0 = y0;
            config.tolerance = *m.tol;
            config.max_refine_depth = m.max_depth;
            auto result = adaptive_run(config, path);
            std::size_t capped = 0;
            for (bool c : result.capped) capped += c ? 1 : 0;
            summary["refinements"] = result.refinements;
            summary["capped_steps"] = capped;
            trace = std::move(result.trace);
        } else {
            trace = run_method(method, m.kappa, y0, path);
        }
    }
    summary["points"] = trace.size();
    emit_trace(m, trace, summary, out);
}

std::string error_row(std::size_t n, double sup, double l2, double lp, double seconds)
{
    return std::to_string(n) + ',' + format_real(sup) + ',' + format_real(l2) + ',' +
           format_real(lp) + ',' + format_real(seconds);
}

void cmd_compare(const RunManifest& m, std::ostream& out, std::ostream& log)
{
    check_kappa(m, log);
    const Method a = method_of(m.scheme);
    const Method b = method_of(m.against);
    if (is_forward(a) != is_forward(b)) {
        throw UsageError("forward (constant/linear/sqrt) and backward (nv/euler-ref) traces "
                         "agree only in law; compare within one family");
    }
    if (!(m.p >= 2.0)) throw UsageError("--p must be >= 2");
    const BrownianPath path = input_path(m);
    const double y0 = is_forward(a) ? 1.0 : resolve_y0(m, m.n);
    const auto opts = integrator_of(m);
    const auto start = std::chrono::steady_clock::now();
    const Trace ta = run_method(a, m.kappa, y0, path, opts);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    const Trace tb = run_method(b, m.kappa, y0, path, opts);
    const double sup = sup_distance(ta, tb);
    const double l2 = lp_distance(ta, tb, 2.0);
    const double lp = lp_distance(ta, tb, m.p);
    const double secs = m.timing ? took.count() : 0.0;

    json summary{{"n", m.n}, {"sup_err", sup}, {"l2_err", l2}, {"lp_err", lp}, {"seconds", secs}};
    Sink sink(m.out, out);
    if (m.format == "json") {
        sink.stream() << json{{"manifest", m.to_json()}, {"summary", summary}}.dump(2) << '\n';
    } else {
        sink.stream() << "n,sup_err,l2_err,lp_err,seconds\n" << error_row(m.n, sup, l2, lp, secs) << '\n';
    }
    sink.close();
    write_sidecar(m, summary);
}

void cmd_study(const RunManifest& m, std::ostream& out, std::ostream& log)
{
    check_kappa(m, log);
    try {
        validate_ladder(m.ladder, m.ref_n);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!(m.p >= 2.0)) throw UsageError("--p must be >= 2");
    if (m.seeds.empty()) throw UsageError("--seeds is empty");

    StudyConfig config;
    config.kappa = m.kappa;
    config.seeds = m.seeds;
    config.resolutions = m.ladder;
    config.reference_n = m.ref_n;
    config.method = method_of(m.scheme);
    if (m.y0 != "auto") config.y0 = resolve_y0(m, m.ref_n);
    config.lp_orders = {2.0, m.p};
    config.integrator = integrator_of(m);
    config.threads = m.threads;
    std::optional<BoundParams> bounds;
    if (m.phi1 || m.phi2) bounds = bounds_of(m);

    const StudyResult result = convergence_study(config);

    json rows = json::array();
    for (const auto& r : result.rows) {
        json row{{"n", r.n},
                 {"sup_err", r.sup_error},
                 {"l2_err", r.lp_error.at(2.0)},
                 {"lp_err", r.lp_error.at(m.p)},
                 {"seconds", m.timing ? r.wall_seconds : 0.0}};
        if (m.phi1) row["phi1"] = phi1(r.n, *bounds);
        if (m.phi2) row["phi2"] = phi2(r.n, *bounds);
        rows.push_back(row);
    }
    json summary{{"rows", rows},
                 {"fit",
                  {{"order", result.fit.order},
                   {"intercept", result.fit.intercept},
                   {"std_error", result.fit.std_error},
                   {"band95", {result.fit.band_low, result.fit.band_high}},
                   {"residuals", result.fit.residuals},
                   {"points", result.fit.points}}}};
    if (m.phi2) summary["eps_n_placeholder"] = true;

    Sink sink(m.out, out);
    if (m.format == "json") {
        sink.stream() << json{{"manifest", m.to_json()}, {"summary", summary}}.dump(2) << '\n';
    } else {
        auto& s = sink.stream();
        s << "n,sup_err,l2_err,lp_err,seconds";
        if (m.phi1) s << ",phi1";
        if (m.phi2) s << ",phi2";
        s << '\n';
        for (const auto& r : result.rows) {
            s << error_row(r.n, r.sup_error, r.lp_error.at(2.0), r.lp_error.at(m.p),
                           m.timing ? r.wall_seconds : 0.0);
            if (m.phi1) s << ',' << format_real(phi1(r.n, *bounds));
            if (m.phi2) s << ',' << format_real(phi2(r.n, *bounds));
            s << '\n';
        }
    }
    sink.close();
    write_sidecar(m, summary);
}

void cmd_moments(const RunManifest& m, std::ostream& out, std::ostream& log)
{
    check_kappa(m, log);
    if (m.samples < 1000) throw UsageError("--samples must be at least 1000");
    if (m.n == 0) throw UsageError("--n must be positive");
    const double y0 = resolve_y0(m, m.n);
    const MomentStat stat = second_moment_stat(m.kappa, y0, m.n, m.samples, m.seed, m.threads);
    const double expected = -y0 * y0 + (m.kappa - 4.0);
    json summary{{"mean_re", stat.mean.real()}, {"mean_im", stat.mean.imag()},
                 {"se_re", stat.se_re},         {"se_im", stat.se_im},
                 {"expected_re", expected},     {"expected_im", 0.0},
                 {"y0", y0}};
    Sink sink(m.out, out);
    if (m.format == "json") {
        sink.stream() << json{{"manifest", m.to_json()}, {"summary", summary}}.dump(2) << '\n';
    } else {
        sink.stream() << "kappa,y0,n,samples,mean_re,mean_im,se_re,se_im,expected_re\n"
                      << format_real(m.kappa) << ',' << format_real(y0) << ',' << m.n << ','
                      << m.samples << ',' << format_real(stat.mean.real()) << ','
                      << format_real(stat.mean.imag()) << ',' << format_real(stat.se_re) << ','
                      << format_real(stat.se_im) << ',' << format_real(expected) << '\n';
    }
    sink.close();
    write_sidecar(m, summary);
}

void cmd_bounds(const RunManifest& m, std::ostream& out, std::ostream& log)
{
    check_kappa(m, log);
    const BoundParams params = bounds_of(m);
    json rows = json::array();
    for (std::size_t n : m.bound_n) {
        if (n == 0) throw UsageError("--bound-n entries must be >= 1");
        rows.push_back({{"n", n}, {"phi1", phi1(n, params)}, {"phi2", phi2(n, params)}});
    }
    json summary{{"rows", rows}, {"eps_n_placeholder", true}};
    Sink sink(m.out, out);
    if (m.format == "json") {
        sink.stream() << json{{"manifest", m.to_json()}, {"summary", summary}}.dump(2) << '\n';
    } else {
        sink.stream() << "n,phi1,phi2\n";
        for (std::size_t n : m.bound_n) {
            sink.stream() << n << ',' << format_real(phi1(n, params)) << ','
                          << format_real(phi2(n, params)) << '\n';
        }
    }
    sink.close();
    write_sidecar(m, summary);
}

/// Options shared by every subcommand, bound to one manifest.
struct Bindings {
    std::string seeds;
    std::string ladder;
    std::string bound_n;
    std::string tol;
};

void add_common(CLI::App& sub, RunManifest& m, Bindings& b)
{
    sub.add_option("--kappa", m.kappa, "SLE parameter kappa > 0");
    sub.add_option("--n", m.n, "number of uniform intervals on [0, 1]");
    sub.add_option("--seed", m.seed, "Brownian seed");
    sub.add_option("--seeds", b.seeds, "seed list, e.g. 1..20 or 3,5,7");
    sub.add_option("--y0", m.y0, "initial height, or 'auto' for 1/sqrt(n)");
    sub.add_option("--scheme", m.scheme, "nv | constant | linear | sqrt | euler-ref")
        ->check(CLI::IsMember({"nv", "constant", "linear", "sqrt", "euler-ref"}));
    sub.add_option("--tol", b.tol, "adaptive step tolerance (nv only)");
    sub.add_option("--max-depth", m.max_depth, "maximum bisections per interval");
    sub.add_option("--out", m.out, "output path, '-' for stdout");
    sub.add_option("--format", m.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    sub.add_option("--threads", m.threads, "worker threads (0 = all cores)");
    sub.add_option("--substeps", m.substeps, "forward integrator: minimum steps per unit time");
    sub.add_option("--rel-move", m.rel_move, "forward integrator: max relative move per step");
    sub.add_flag("!--no-timing", m.timing, "write 0 in timing columns");
}

}  // namespace

void execute(const RunManifest& m, std::ostream& out, std::ostream& log)
{
    if (m.command == "trace") return cmd_trace(m, out, log);
    if (m.command == "compare") return cmd_compare(m, out, log);
    if (m.command == "study") return cmd_study(m, out, log);
    if (m.command == "moments") return cmd_moments(m, out, log);
    if (m.command == "bounds") return cmd_bounds(m, out, log);
    throw UsageError("unknown command '" + m.command + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"SLE trace simulation and convergence laboratory", "sle"};
    app.require_subcommand(1);

    RunManifest m;
    Bindings b;
    std::string replay_file;
    std::string replay_out;

    auto* trace = app.add_subcommand("trace", "simulate one trace and write it as CSV/JSON");
    add_common(*trace, m, b);
    trace->add_flag("--zero-noise", m.zero_noise, "use W = 0");

    auto* compare = app.add_subcommand("compare", "distance between two schemes on one path");
    add_common(*compare, m, b);
    compare->add_option("--against", m.against, "second scheme")
        ->check(CLI::IsMember({"nv", "constant", "linear", "sqrt", "euler-ref"}));
    compare->add_option("--p", m.p, "L^p order (>= 2)");
    compare->add_flag("--zero-noise", m.zero_noise, "use W = 0");

    auto* study = app.add_subcommand("study", "same-path convergence study");
    add_common(*study, m, b);
    study->add_option("--ladder", b.ladder, "resolutions, e.g. 64..4096 or 64,128");
    study->add_option("--ref-n", m.ref_n, "reference resolution");
    study->add_option("--p", m.p, "L^p order (>= 2)");
    study->add_flag("--phi1", m.phi1, "add the phi1 rate column");
    study->add_flag("--phi2", m.phi2, "add the phi2 rate column");

    auto* moments = app.add_subcommand("moments", "Monte Carlo mean of Z_1^2 for the NV scheme");
    add_common(*moments, m, b);
    moments->add_option("--samples", m.samples, "number of independent paths");

    auto* bounds = app.add_subcommand("bounds", "evaluate the rate functions phi1 and phi2");
    add_common(*bounds, m, b);
    bounds->add_option("--bound-n", b.bound_n, "resolutions, e.g. 16,64,256");

    for (auto* sub : {study, bounds}) {
        sub->add_option("--beta1", m.beta1, "beta1 in (0, 1)");
        sub->add_option("--eps0", m.eps0, "eps0 in (0, 1)");
        sub->add_option("--alpha", m.alpha, "subpower exponent (0 gives phi = 1)");
        sub->add_option("--c2", m.c2, "phi2 constant c2");
        sub->add_option("--c3", m.c3, "phi2 constant c3");
        sub->add_option("--c4", m.c4, "phi2 constant c4");
        sub->add_option("--eps-n", m.eps_n, "phi2 placeholder eps_n");
    }

    auto* replay = app.add_subcommand("replay", "re-run a JSON manifest or sidecar");
    replay->add_option("manifest", replay_file, "JSON file with a manifest")->required();
    replay->add_option("--out", replay_out, "override the output path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*replay) {
            std::ifstream f(replay_file);
            if (!f) throw std::runtime_error("cannot open manifest '" + replay_file + "'");
            RunManifest loaded = RunManifest::from_json(json::parse(f));
            if (!replay_out.empty()) loaded.out = replay_out;
            execute(loaded, out, err);
            return 0;
        }
        for (auto* sub : app.get_subcommands()) m.command = sub->get_name();
        if (!b.seeds.empty()) m.seeds = parse_list(b.seeds);
        if (!b.ladder.empty()) m.ladder = parse_ladder(b.ladder);
        if (!b.bound_n.empty()) {
            m.bound_n.clear();
            for (auto v : parse_list(b.bound_n)) m.bound_n.push_back(static_cast<std::size_t>(v));
        }
        if (!b.tol.empty()) {
            if (b.tol == "inf") {
                m.tol = std::numeric_limits<double>::infinity();
            } else {
                try {
                    m.tol = std::stod(b.tol);
                } catch (const std::logic_error&) {
                    throw UsageError("--tol must be a number or 'inf'");
                }
            }
        }
        execute(m, out, err);
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        err << "error: malformed manifest: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sle::cli
