#include "gradflow/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gradflow/cases.hpp"
#include "gradflow/errors.hpp"
#include "gradflow/frame.hpp"
#include "gradflow/poisson.hpp"
#include "gradflow/surfgeo.hpp"
#include "gradflow/trajectory.hpp"
#include "gradflow/verify.hpp"

namespace gradflow::cli {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------- parsing helpers

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

// Numbers may be written as constant expressions ("1/3", "pi/4").
double parse_number(const std::string& s, const std::string& what) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        const Expr e = parse_expr(s, {}, {});
        return eval_value(e, std::span<const double>{});
    } catch (const Error& e) {
        throw ConfigError("invalid number '" + s + "' for " + what + ": " + e.what());
    }
}

std::vector<double> parse_list(const std::string& s, std::size_t n, const std::string& what) {
    const auto parts = split(s, ',');
    if (parts.size() != n)
        throw ConfigError(what + " expects " + std::to_string(n) + " comma-separated values, got '" +
                          s + "'");
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(parse_number(p, what));
    return out;
}

Vec3 parse_vec3(const std::string& s, const std::string& what) {
    const auto v = parse_list(s, 3, what);
    return {v[0], v[1], v[2]};
}

ParamMap parse_params(const std::string& s) {
    ParamMap out;
    if (s.empty()) return out;
    for (const auto& item : split(s, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--params expects name=value pairs, got '" + item + "'");
        out[item.substr(0, eq)] = parse_number(item.substr(eq + 1), "--params " + item.substr(0, eq));
    }
    return out;
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

// ---------------------------------------------------------------- shared options

struct Common {
    std::string case_name;
    std::string field;
    std::string potential;
    std::string params;
    std::string out_path;
    std::string format;
    double rtol = 1e-10;
    double atol = 1e-12;
};

struct Source {
    std::optional<CaseSystem> cs;
    FieldDef field;
    std::optional<Expr> potential;
    ParamMap params;
};

Source resolve_source(const Common& c) {
    const bool has_case = !c.case_name.empty(), has_field = !c.field.empty();
    if (has_case == has_field)
        throw ConfigError("exactly one field source is required: --case or --field");
    Source src;
    src.params = parse_params(c.params);
    if (has_case) {
        src.cs = get_case(c.case_name, src.params);
        src.field = src.cs->field;
        src.params = src.cs->params;
        src.potential = src.cs->potential.expr;
    } else {
        const auto comps = split(c.field, ',');
        if (comps.size() != 3)
            throw ConfigError("--field expects three comma-separated components, got '" + c.field + "'");
        src.field = parse_field(comps[0], comps[1], comps[2], src.params);
    }
    if (!c.potential.empty()) src.potential = parse_expr(c.potential, src.params);
    return src;
}

void check_tolerances(const Common& c) {
    if (!(c.rtol > 0) || !(c.atol > 0)) throw ConfigError("tolerances must be positive");
}

// Writes to --out when given, otherwise to the default stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw ConfigError("cannot open output file '" + path + "'");
            os_ = &file_;
        }
    }
    std::ostream& stream() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--case", c.case_name, "Built-in system: sphere, euler-like, aristotle");
    sub->add_option("--field", c.field, "Field components fx,fy,fz in x, y, z");
    sub->add_option("--potential", c.potential, "Potential F (defaults to the case potential)");
    sub->add_option("--params", c.params, "Parameters name=value,... (values may be expressions)");
    sub->add_option("--out", c.out_path, "Output file (default: standard output)");
    sub->add_option("--format", c.format, "Output format (default: json for analyze and distance, csv otherwise)")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--rtol", c.rtol, "Relative integration tolerance");
    sub->add_option("--atol", c.atol, "Absolute integration tolerance");
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOpts {
    std::string at;
    double tol_case = 1e-8;
};

int cmd_analyze(const Common& c, const AnalyzeOpts& o, std::ostream& out) {
    if (o.at.empty()) throw ConfigError("analyze needs --at x,y,z");
    const Source src = resolve_source(c);
    const Vec3 x = parse_vec3(o.at, "--at");
    const Frame fr = classify_and_build(src.field, x, o.tol_case);
    FrameOptions fo;
    fo.tol_case = o.tol_case;
    const Helicities h = helicities(src.field, x, fr, fo);
    const Vec3 curl_v = curl(src.field, x);
    const double div_v = divergence(src.field, x);
    const double speed = src.field.value(x).norm();

    Sink sink(c.out_path, out);
    std::ostream& os = sink.stream();
    if (c.format == "csv") {
        os << "x,y,z,case_tag,tx,ty,tz,nx,ny,nz,bx,by,bz,H_t,H_n,H_b,H_tn,H_nt,H_nb,H_bn,H_tb,H_bt,"
              "curl_x,curl_y,curl_z,divergence,speed\n";
        os << format_number(x[0]) << ',' << format_number(x[1]) << ',' << format_number(x[2]) << ','
           << to_string(fr.case_tag);
        for (const Vec3* v : {&fr.t, &fr.n, &fr.b})
            for (int i = 0; i < 3; ++i) os << ',' << format_number((*v)[i]);
        for (double d : {h.t, h.n, h.b, h.tn, h.nt, h.nb, h.bn, h.tb, h.bt}) os << ',' << format_number(d);
        for (int i = 0; i < 3; ++i) os << ',' << format_number(curl_v[i]);
        os << ',' << format_number(div_v) << ',' << format_number(speed) << '\n';
        return kExitOk;
    }
    json j;
    j["point"] = vec_json(x);
    j["case_tag"] = std::string(to_string(fr.case_tag));
    j["t"] = vec_json(fr.t);
    j["n"] = vec_json(fr.n);
    j["b"] = vec_json(fr.b);
    j["aux"] = fr.aux ? vec_json(*fr.aux) : json(nullptr);
    j["helicities"] = {{"H_t", h.t},   {"H_n", h.n},   {"H_b", h.b},   {"H_tn", h.tn}, {"H_nt", h.nt},
                       {"H_nb", h.nb}, {"H_bn", h.bn}, {"H_tb", h.tb}, {"H_bt", h.bt}};
    j["curl"] = vec_json(curl_v);
    j["divergence"] = div_v;
    j["speed"] = speed;
    os << j.dump(2) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- flow

struct FlowOpts {
    std::string x0;
    std::string t = "0,1";
    double fixed_step = 0;
    std::string scheme = "rk4";
    std::string monitors;
};

int cmd_flow(const Common& c, const FlowOpts& o, std::ostream& out) {
    check_tolerances(c);
    if (o.x0.empty()) throw ConfigError("flow needs --x0 x,y,z");
    const Source src = resolve_source(c);
    const Vec3 x0 = parse_vec3(o.x0, "--x0");
    const auto span = parse_list(o.t, 2, "--t");
    FlowOptions fo;
    fo.rtol = c.rtol;
    fo.atol = c.atol;
    if (o.fixed_step < 0) throw ConfigError("--fixed-step must be positive");
    fo.fixed_step = o.fixed_step;
    fo.fixed_scheme = o.scheme == "dp5" ? FixedScheme::DormandPrince : FixedScheme::Rk4;
    if (!o.monitors.empty()) {
        for (const auto& m : split(o.monitors, ','))
            fo.monitors.push_back({m, parse_expr(m, src.params)});
    } else if (src.cs) {
        for (const NamedExpr& h : src.cs->conserved) fo.monitors.push_back({h.name, h.expr});
    }
    const Trajectory traj = integrate_flow(src.field, x0, span[0], span[1], fo);

    Sink sink(c.out_path, out);
    if (c.format == "json") {
        json j;
        j["samples"] = traj.samples.size();
        j["end"] = {{"t", traj.samples.back().t}, {"x", vec_json(traj.samples.back().x)},
                    {"s", traj.samples.back().s}};
        json drift = json::object();
        for (const Monitor& m : fo.monitors) drift[m.name] = conservation_drift(traj, m.expr, src.params);
        j["drift"] = drift;
        if (src.potential) j["min_dF_dt"] = potential_monotonicity(traj, *src.potential, src.params);
        sink.stream() << j.dump(2) << '\n';
    } else {
        write_csv(sink.stream(), traj);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- riccati

struct RiccatiOpts {
    std::string x0;
    std::string s = "0,1";
    double step = 0.05;
    std::string mu0 = "0,1";
    bool no_tube = false;
};

int cmd_riccati(const Common& c, const RiccatiOpts& o, std::ostream& out) {
    check_tolerances(c);
    if (o.x0.empty()) throw ConfigError("riccati needs --x0 x,y,z");
    const Source src = resolve_source(c);
    const Vec3 x0 = parse_vec3(o.x0, "--x0");
    const auto s = parse_list(o.s, 2, "--s");
    if (!(s[1] >= s[0])) throw ConfigError("--s expects a <= b");
    const auto mu = parse_list(o.mu0, 2, "--mu0");
    const std::array<double, 2> psi0{std::atan(mu[0]), std::atan(mu[1])};
    PoissonOptions po;
    po.rtol = c.rtol;
    po.atol = c.atol;
    po.tube = !o.no_tube;
    const PoissonPair pair = integrate_poisson_pair(src.field, x0, psi0, s[1] - s[0], o.step, po);

    Sink sink(c.out_path, out);
    std::ostream& os = sink.stream();
    const auto jacobi = [&](const PoissonSample& smp, int i) {
        return smp.has_tube ? tube_jacobi_residual(smp, i) : std::numeric_limits<double>::quiet_NaN();
    };
    if (c.format == "json") {
        json arr = json::array();
        for (const PoissonSample& smp : pair.samples) {
            arr.push_back({{"t", smp.t},
                           {"x", vec_json(smp.x)},
                           {"s", s[0] + smp.s},
                           {"psi", {smp.psi[0], smp.psi[1]}},
                           {"mu", {smp.mu(0), smp.mu(1)}},
                           {"logA", {smp.log_a(0), smp.log_a(1)}},
                           {"J1", vec_json(smp.J[0])},
                           {"J2", vec_json(smp.J[1])},
                           {"phi", smp.phi},
                           {"jacobi", {jacobi(smp, 0), jacobi(smp, 1)}}});
        }
        os << json({{"case_tag", std::string(to_string(pair.reference.case_tag))}, {"samples", arr}}).dump(2)
           << '\n';
        return kExitOk;
    }
    os << "t,x,y,z,s,psi1,psi2,mu1,mu2,logA1,logA2,jacobi1,jacobi2\n";
    for (const PoissonSample& smp : pair.samples) {
        os << format_number(smp.t) << ',' << format_number(smp.x[0]) << ',' << format_number(smp.x[1])
           << ',' << format_number(smp.x[2]) << ',' << format_number(s[0] + smp.s);
        for (double d : {smp.psi[0], smp.psi[1], smp.mu(0), smp.mu(1), smp.log_a(0), smp.log_a(1),
                         jacobi(smp, 0), jacobi(smp, 1)})
            os << ',' << format_number(d);
        os << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- geodesic

struct GeodesicOpts {
    std::string x0;
    std::string dir;
    std::string level;
    double length = 2 * std::numbers::pi;
    double step = 1e-3;
};

double resolve_level(const Source& src, const std::string& level, const Vec3& x) {
    if (!level.empty()) return parse_number(level, "--c");
    return eval_value(*src.potential, x, src.params);
}

int cmd_geodesic(const Common& c, const GeodesicOpts& o, std::ostream& out) {
    if (o.x0.empty()) throw ConfigError("geodesic needs --x0 (or --from) x,y,z");
    const Source src = resolve_source(c);
    if (!src.potential) throw ConfigError("geodesic needs a potential: --case or --potential");
    if (!(o.step > 0)) throw ConfigError("--step must be positive");
    GeodesicOptions go;
    go.step = o.step;
    go.params = src.params;
    const Vec3 raw = parse_vec3(o.x0, "--x0");
    const double level = resolve_level(src, o.level, raw);
    const Vec3 x0 = project_to_level(*src.potential, level, raw, go);
    Vec3 dir;
    if (!o.dir.empty()) {
        dir = parse_vec3(o.dir, "--dir");
    } else {
        const Vec3 nrm = eval_jet2(*src.potential, x0, src.params).grad.normalized();
        dir = nrm.cross(std::abs(nrm[2]) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX());
    }
    const auto geo = geodesic_integrate(*src.potential, level, x0, dir, o.length, go);

    Sink sink(c.out_path, out);
    std::ostream& os = sink.stream();
    if (c.format == "json") {
        double res = 0, kg = 0;
        for (const auto& g : geo) {
            res = std::max(res, g.surface_residual);
            kg = std::max(kg, std::abs(g.kappa_g));
        }
        os << json({{"level", level},
                    {"samples", geo.size()},
                    {"start", vec_json(geo.front().x)},
                    {"end", vec_json(geo.back().x)},
                    {"max_surface_residual", res},
                    {"max_abs_kappa_g", kg}})
                  .dump(2)
           << '\n';
        return kExitOk;
    }
    os << "t,x,y,z,s,xi,eta,surface_residual,kappa_g\n";
    for (const auto& g : geo) {
        os << format_number(g.sigma) << ',' << format_number(g.x[0]) << ',' << format_number(g.x[1])
           << ',' << format_number(g.x[2]) << ',' << format_number(g.sigma) << ',' << format_number(g.xi)
           << ',' << format_number(g.eta) << ',' << format_number(g.surface_residual) << ','
           << format_number(g.kappa_g) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- distance

struct DistanceOpts {
    std::string p;
    std::string x;
    std::string level;
};

int cmd_distance(const Common& c, const DistanceOpts& o, std::ostream& out) {
    if (o.p.empty() || o.x.empty()) throw ConfigError("distance needs --p and --x");
    const Source src = resolve_source(c);
    if (!src.potential) throw ConfigError("distance needs a potential: --case or --potential");
    const Vec3 p = parse_vec3(o.p, "--p"), x = parse_vec3(o.x, "--x");
    const double level = resolve_level(src, o.level, p);
    DistanceOptions dopt;
    dopt.geodesic.params = src.params;
    const Vec3 ps = project_to_level(*src.potential, level, p, dopt.geodesic);
    const Vec3 xs = project_to_level(*src.potential, level, x, dopt.geodesic);
    const DistanceResult r = geodesic_distance(*src.potential, level, ps, xs, dopt);
    Sink sink(c.out_path, out);
    sink.stream() << json({{"distance", r.distance},
                           {"level", level},
                           {"p", vec_json(ps)},
                           {"x", vec_json(xs)},
                           {"initial_direction", vec_json(r.initial_direction)},
                           {"miss", r.miss},
                           {"converged_starts", r.converged_starts}})
                         .dump(2)
                  << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const Common& c, std::ostream& out) {
    if (c.case_name.empty()) throw ConfigError("verify needs --case");
    if (!c.field.empty()) throw ConfigError("verify runs on built-in cases only; drop --field");
    const CaseSystem cs = get_case(c.case_name, parse_params(c.params));
    const auto checks = verify_case(cs);
    bool all = true;
    Sink sink(c.out_path, out);
    std::ostream& os = sink.stream();
    if (c.format == "json") {
        json arr = json::array();
        for (const CheckResult& r : checks) {
            all = all && r.pass;
            arr.push_back({{"name", r.name}, {"pass", r.pass}, {"value", r.value}, {"tol", r.tol},
                           {"relation", r.below ? "<" : ">"}, {"note", r.note}});
        }
        os << json({{"case", cs.name}, {"pass", all}, {"checks", arr}}).dump(2) << '\n';
    } else {
        for (const CheckResult& r : checks) {
            all = all && r.pass;
            os << (r.pass ? "PASS  " : "FAIL  ") << cs.name << ": " << r.name << "  measured "
               << format_number(r.value) << (r.below ? " < " : " > ") << format_number(r.tol);
            if (!r.note.empty()) os << "  (" << r.note << ")";
            os << '\n';
        }
        os << (all ? "all checks passed" : "some checks failed") << '\n';
    }
    return all ? kExitOk : kExitChecksFailed;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Frenet-Serret frames, Poisson pairs and potential-surface geometry of 3D flows",
                 "gradflow"};
    app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
    app.require_subcommand(1);

    Common common;
    AnalyzeOpts ao;
    FlowOpts fo;
    RiccatiOpts ro;
    GeodesicOpts go;
    DistanceOpts dopt;

    auto* analyze = app.add_subcommand("analyze", "Frame, helicities, curl and divergence at a point");
    add_common(analyze, common);
    analyze->add_option("--at", ao.at, "Point x,y,z");
    analyze->add_option("--tol-case", ao.tol_case, "Case dispatch tolerance");

    auto* flow = app.add_subcommand("flow", "Integrate dx/dt = v(x) and monitor conserved quantities");
    add_common(flow, common);
    flow->add_option("--x0", fo.x0, "Start point x,y,z");
    flow->add_option("--t", fo.t, "Time span a,b");
    flow->add_option("--fixed-step", fo.fixed_step, "Integrate with this fixed step, no error control");
    flow->add_option("--scheme", fo.scheme, "Fixed-step scheme: rk4 (classical) or dp5 (Dormand-Prince, fifth order)")
        ->check(CLI::IsMember({"rk4", "dp5"}));
    flow->add_option("--monitor", fo.monitors, "Monitored expressions, comma-separated");

    auto* riccati = app.add_subcommand("riccati", "Integrate the Poisson pair along a streamline");
    add_common(riccati, common);
    riccati->add_option("--x0", ro.x0, "Start point x,y,z");
    riccati->add_option("--s", ro.s, "Arclength span a,b");
    riccati->add_option("--step", ro.step, "Sampling interval in arclength");
    riccati->add_option("--mu0", ro.mu0, "Initial Riccati values mu1,mu2 (inf allowed)");
    riccati->add_flag("--no-tube", ro.no_tube, "Skip the neighbouring streamlines (no Jacobi columns)");

    auto* geodesic = app.add_subcommand("geodesic", "Integrate a geodesic on a level set of the potential");
    add_common(geodesic, common);
    geodesic->add_option("--x0,--from", go.x0, "Start point x,y,z (projected onto the level set)");
    geodesic->add_option("--dir", go.dir, "Initial direction x,y,z (projected onto the tangent plane)");
    geodesic->add_option("--c", go.level, "Level c of F (default: F at the start point)");
    geodesic->add_option("--length", go.length, "Arclength to integrate");
    geodesic->add_option("--step", go.step, "Integration step");

    auto* distance = app.add_subcommand("distance", "Geodesic distance between two points of a level set");
    add_common(distance, common);
    distance->add_option("--p", dopt.p, "Base point x,y,z");
    distance->add_option("--x", dopt.x, "Target point x,y,z");
    distance->add_option("--c", dopt.level, "Level c of F (default: F at the base point)");

    auto* verify = app.add_subcommand("verify", "Run the invariant suite for a built-in case");
    add_common(verify, common);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    if (common.format.empty()) common.format = (*analyze || *distance) ? "json" : "csv";
    try {
        if (*analyze) return cmd_analyze(common, ao, out);
        if (*flow) return cmd_flow(common, fo, out);
        if (*riccati) return cmd_riccati(common, ro, out);
        if (*geodesic) return cmd_geodesic(common, go, out);
        if (*distance) return cmd_distance(common, dopt, out);
        if (*verify) return cmd_verify(common, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

} // namespace gradflow::cli
