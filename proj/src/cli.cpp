#include "dogforge/cli.hpp"

#include "dogforge/bench.hpp"
#include "dogforge/io.hpp"
#include "dogforge/kernels.hpp"
#include "dogforge/numerics.hpp"
#include "dogforge/parallel.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace dogforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

double parse_angle(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (c != ' ') s += c;
    if (s.empty()) fail(ErrorKind::Parse, "bad_angle", "empty angle");
    const auto pos = s.find("pi");
    if (pos == std::string::npos) return io::parse_double(s);
    std::string coef = s.substr(0, pos);
    if (!coef.empty() && coef.back() == '*') coef.pop_back();
    double v = pi;
    if (coef == "-")
        v = -pi;
    else if (!coef.empty())
        v *= io::parse_double(coef);
    std::string rest = s.substr(pos + 2);
    if (!rest.empty()) {
        if (rest.front() != '/') fail(ErrorKind::Parse, "bad_angle", "cannot parse angle '" + raw + "'");
        const double den = io::parse_double(rest.substr(1));
        if (den == 0) fail(ErrorKind::Parse, "bad_angle", "zero denominator in '" + raw + "'");
        v /= den;
    }
    return v;
}

DesignSpec parse_design_spec(const std::string& text) {
    DesignSpec d;
    d.text = text;
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if (colon == std::string::npos || (head != "twisted" && head != "orange2d" && head != "standard")) {
        d.bundle = text;
        return d;
    }
    std::string rest = text.substr(colon + 1);
    if (head == "standard") {
        d.family = dogsynth::Family::StandardOrangeSlice;
        const auto c2 = rest.find(':');
        if (c2 != std::string::npos) {
            d.shape = rest.substr(c2 + 1);
            rest = rest.substr(0, c2);
            if (d.shape != "square" && d.shape != "sech")
                fail(ErrorKind::Parse, "bad_design", "pulse shape must be square or sech in '" + text + "'");
        }
    } else {
        d.family = head == "twisted" ? dogsynth::Family::Twisted3D : dogsynth::Family::OrangeSlice2D;
    }
    d.value = parse_angle(rest);
    return d;
}

namespace {

struct Common {
    std::string output_dir = ".";
    std::size_t grid_points = 20001;
    double omega0 = 1.0;
    bool seedless = false;  // accepted for compatibility; nothing is random
    unsigned threads = 0;
    double closure_tol = 1e-4, pt_tol = 1e-6, tantrix_tol = 1e-6;
};

Tolerances tolerances(const Common& c) {
    Tolerances t;
    t.closure = c.closure_tol;
    t.pt = c.pt_tol;
    t.tantrix = c.tantrix_tol;
    return t;
}

void check_common(const Common& c) {
    if (c.grid_points < 257) fail(ErrorKind::Precondition, "grid_points", "--grid-points must be at least 257");
    if (!(c.omega0 > 0)) fail(ErrorKind::Precondition, "omega0_range", "--omega0 must be positive");
    if (!(c.closure_tol > 0 && c.pt_tol > 0 && c.tantrix_tol > 0))
        fail(ErrorKind::Precondition, "bad_tolerance", "tolerances must be positive");
}

// Range checks that run before any computation.
void check_spec(const DesignSpec& s) {
    switch (s.family) {
        case dogsynth::Family::Twisted3D:
            if (!(std::abs(s.value) <= pi / 500))
                fail(ErrorKind::Precondition, "xi_range", "|xi| must not exceed pi/500 in '" + s.text + "'");
            break;
        case dogsynth::Family::OrangeSlice2D:
        case dogsynth::Family::StandardOrangeSlice:
            if (!(s.value > -pi && s.value <= pi))
                fail(ErrorKind::Precondition, "phi0_range", "phi0 must lie in (-pi, pi] in '" + s.text + "'");
            break;
        default:
            if (!fs::exists(s.bundle))
                fail(ErrorKind::Precondition, "missing_bundle", "no design bundle at '" + s.bundle + "'");
    }
}

dogsynth::DogDesign build(const DesignSpec& s, const Common& c, bool renorm, bool refine, bool bisector) {
    switch (s.family) {
        case dogsynth::Family::Twisted3D: {
            dogsynth::TwistedOptions o;
            o.grid_points = c.grid_points;
            o.renormalize_area = renorm;
            o.bisector_offset = bisector;
            o.synth.tol = tolerances(c);
            return dogsynth::twisted_3d(s.value, c.omega0, o);
        }
        case dogsynth::Family::OrangeSlice2D: {
            dogsynth::OrangeSliceOptions o;
            o.grid_points = c.grid_points;
            o.renormalize_area = renorm;
            o.refine_closure = refine;
            o.tol = tolerances(c);
            return dogsynth::orange_slice_2d(s.value, c.omega0, o);
        }
        case dogsynth::Family::StandardOrangeSlice:
            return dogsynth::standard_orange_slice_design(s.value, s.shape, c.omega0, c.grid_points);
        default:
            return io::read_bundle(s.bundle);
    }
}

using Files = std::vector<std::pair<std::string, std::string>>;

json tolerances_json(const Tolerances& t) {
    return {{"tantrix", t.tantrix}, {"closure", t.closure}, {"pt", t.pt}, {"angle", t.angle}, {"area", t.area}};
}

// Writes all outputs plus a manifest only after every computation succeeded.
void emit(const Common& c, const std::string& manifest_name, json manifest, const Files& files,
          const std::vector<std::string>& inputs, std::ostream& out) {
    json outputs = json::object();
    for (const auto& [name, content] : files) outputs[name] = io::git_blob_sha1(content);
    json ins = json::object();
    for (const auto& p : inputs) ins[p] = io::git_blob_sha1(io::read_file(p));
    manifest["outputs"] = outputs;
    manifest["inputs"] = ins;
    manifest["isa"] = kernels::isa_name(kernels::active_isa());
    manifest["grid_points"] = c.grid_points;
    manifest["omega0"] = c.omega0;
    manifest["tolerances"] = tolerances_json(tolerances(c));
    const fs::path dir = c.output_dir;
    for (const auto& [name, content] : files) io::write_atomic(dir / name, content);
    io::write_atomic(dir / manifest_name, manifest.dump(1) + "\n");
    for (const auto& [name, content] : files) out << "wrote " << (dir / name).string() << "\n";
    out << "wrote " << (dir / manifest_name).string() << "\n";
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--output-dir,-o", c.output_dir, "Directory for emitted files");
    app->add_option("--grid-points", c.grid_points, "Samples per design");
    app->add_option("--omega0", c.omega0, "Drive scale");
    app->add_flag("--seedless", c.seedless, "No-op: all runs are deterministic");
    app->add_option("--threads", c.threads, "Worker threads (default DOGFORGE_THREADS or all cores)");
    app->add_option("--closure-tol", c.closure_tol, "Closure tolerance relative to curve length");
    app->add_option("--pt-tol", c.pt_tol, "Parallel-transport tolerance");
    app->add_option("--tantrix-tol", c.tantrix_tol, "Unit-speed tolerance");
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-') ? ch : '_';
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"dogforge: doubly geometric single-qubit gate synthesis and benchmarking"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI run configuration; command-line flags take precedence");

    Common common;
    bool no_renorm = false, no_refine = false, literal_offset = false;

    auto* synth = app.add_subcommand("synth", "Synthesize a design and write its bundle");
    std::string family, xi_text, phi0_text, shape = "square", curve_file, stem = "design";
    synth->add_option("--family", family, "twisted | orange2d | standard | custom")
        ->required()
        ->check(CLI::IsMember({"twisted", "orange2d", "standard", "custom"}));
    synth->add_option("--xi", xi_text, "Twist constant (twisted)");
    synth->add_option("--phi0", phi0_text, "Opening angle (orange2d, standard)");
    synth->add_option("--shape", shape, "square | sech (standard)")->check(CLI::IsMember({"square", "sech"}));
    synth->add_option("--curve", curve_file, "Curve CSV t,x,y,z[,tx,ty,tz] (custom)");
    synth->add_option("--stem", stem, "Bundle file stem");
    synth->add_flag("--no-renormalize", no_renorm, "Keep the literal sech amplitudes");
    synth->add_flag("--no-refine", no_refine, "Keep the literal inner pulse centre (orange2d)");
    synth->add_flag("--literal-offset", literal_offset, "Twist about y = pi/2 instead of the bisector");
    add_common(synth, common);

    auto* sweep = app.add_subcommand("sweep", "Fidelity versus detuning or amplitude error");
    std::string axis = "detuning";
    std::vector<std::string> designs;
    double rate_min = 1e-3, rate_max = 1e-1;
    std::size_t rate_points = 41;
    sweep->add_option("--axis", axis, "detuning | amplitude")->check(CLI::IsMember({"detuning", "amplitude"}));
    sweep->add_option("--designs", designs, "Design specs, or 'none'")->delimiter(',')->required();
    sweep->add_option("--rate-min", rate_min, "Smallest error rate");
    sweep->add_option("--rate-max", rate_max, "Largest error rate");
    sweep->add_option("--points", rate_points, "Number of log-spaced rates");
    add_common(sweep, common);

    auto* curve = app.add_subcommand("curve", "Error curves with curvature and torsion");
    std::vector<std::string> curve_designs;
    curve->add_option("--designs", curve_designs, "Design specs")->delimiter(',')->required();
    add_common(curve, common);

    auto* toy = app.add_subcommand("toy", "Square-pulse holonomic vs non-holonomic toy models");
    std::vector<std::string> toy_phis = {"0.595pi"};
    std::vector<double> toy_eps;
    toy->add_option("--phi", toy_phis, "Gate angles")->delimiter(',');
    toy->add_option("--eps", toy_eps, "Error values (default: 21 log-spaced in [1e-3, 1e-1])")->delimiter(',');
    add_common(toy, common);

    auto* pmap = app.add_subcommand("phase-map", "Geometric phase versus twist");
    std::string xi_min = "pi/20000", xi_max = "pi/2000";
    std::size_t xi_points = 11;
    pmap->add_option("--xi-min", xi_min, "Smallest twist");
    pmap->add_option("--xi-max", xi_max, "Largest twist");
    pmap->add_option("--points", xi_points, "Number of evenly spaced twists");
    add_common(pmap, common);

    auto* validate = app.add_subcommand("validate", "Re-check the invariants of a stored bundle");
    std::string bundle_path;
    validate->add_option("bundle", bundle_path, "Bundle directory or JSON file")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << json{{"error", "parse_error"}, {"kind", "parse"}, {"message", e.what()}}.dump() << "\n";
        return Usage;
    }

    json manifest = {{"tool", "dogforge"},
                     {"arguments", std::vector<std::string>(args.begin() + (args.empty() ? 0 : 1), args.end())}};
    try {
        if (*synth) {
            check_common(common);
            DesignSpec spec;
            if (family == "twisted") {
                if (xi_text.empty()) fail(ErrorKind::Parse, "missing_option", "--xi is required for twisted");
                spec = parse_design_spec("twisted:" + xi_text);
            } else if (family == "orange2d" || family == "standard") {
                if (phi0_text.empty()) fail(ErrorKind::Parse, "missing_option", "--phi0 is required");
                spec = parse_design_spec(family == "orange2d" ? "orange2d:" + phi0_text
                                                              : "standard:" + phi0_text + ":" + shape);
            } else {
                if (curve_file.empty()) fail(ErrorKind::Parse, "missing_option", "--curve is required for custom");
                if (!fs::exists(curve_file)) fail(ErrorKind::Precondition, "missing_input", "no file " + curve_file);
            }
            if (family != "custom") check_spec(spec);
            dogsynth::DogDesign d;
            std::vector<std::string> inputs;
            if (family == "custom") {
                dogsynth::SynthOptions so;
                so.tol = tolerances(common);
                d = dogsynth::synthesize(io::parse_curve_csv(io::read_file(curve_file), "custom"), so);
                inputs.push_back(curve_file);
            } else {
                d = build(spec, common, !no_renorm, !no_refine, !literal_offset);
            }
            const Unitary2 gate = qdyn::propagate_final(d.fields);
            Files files = {{stem + ".json", io::design_json(d)},
                           {stem + "_curve.csv", io::curve_csv(d.error_curve)},
                           {stem + "_fields.csv", io::fields_csv(d.fields)},
                           {stem + "_path.csv", io::path_csv(d.path)}};
            manifest["command"] = "synth";
            manifest["family"] = dogsynth::family_name(d.family);
            manifest["options"] = {{"renormalize_area", !no_renorm},
                                   {"refine_closure", !no_refine},
                                   {"bisector_offset", !literal_offset}};
            emit(common, stem + "_manifest.json", manifest, files, inputs, out);
            out << "family " << dogsynth::family_name(d.family) << "\n"
                << "beta_g " << io::format_double(d.beta_g) << " (" << io::format_double(d.beta_g / pi) << " pi)\n"
                << "beta_g_propagated " << io::format_double(d.beta_g_propagated) << "\n"
                << "gate_phase " << io::format_double(std::arg(gate(0, 0)) / pi) << " pi\n";
            return Ok;
        }
        if (*sweep) {
            check_common(common);
            if (designs.size() == 1 && designs[0] == "none") designs.clear();
            if (designs.empty()) fail(ErrorKind::Parse, "no_designs", "--designs lists no designs");
            if (!(rate_min > 0 && rate_max > rate_min && rate_points >= 2))
                fail(ErrorKind::Precondition, "bad_axis", "need 0 < --rate-min < --rate-max and --points >= 2");
            std::vector<DesignSpec> specs;
            for (const auto& t : designs) specs.push_back(parse_design_spec(t));
            for (const auto& s : specs) check_spec(s);
            std::vector<bench::SweepDesign> sd(specs.size());
            parallel_for(
                specs.size(),
                [&](std::size_t i) {
                    sd[i] = bench::sweep_design(build(specs[i], common, true, true, true), specs[i].text);
                },
                common.threads);
            const auto rates = bench::log_spaced(rate_min, rate_max, rate_points);
            const auto result = axis == "detuning" ? bench::detuning_sweep(sd, rates, common.threads)
                                                   : bench::amplitude_sweep(sd, rates, common.threads);
            std::vector<std::string> inputs;
            for (const auto& s : specs)
                if (!s.bundle.empty()) inputs.push_back(s.bundle);
            manifest["command"] = "sweep";
            manifest["axis"] = axis;
            manifest["designs"] = designs;
            manifest["rates"] = {{"min", rate_min}, {"max", rate_max}, {"points", rate_points}};
            const std::string name = "sweep_" + axis;
            emit(common, name + "_manifest.json", manifest, {{name + ".csv", io::sweep_csv(result)}}, inputs, out);
            for (std::size_t i = 0; i < result.series.size(); ++i) {
                const double lo = std::max(rate_min, 1e-3), hi = std::min(rate_max, 1e-2);
                if (hi > lo) {
                    try {
                        const auto fit = bench::loglog_slope(result, i, lo, hi);
                        out << "slope " << result.series[i].label << " " << io::format_double(fit.slope) << "\n";
                    } catch (const Error&) {
                    }
                }
            }
            return Ok;
        }
        if (*curve) {
            check_common(common);
            std::vector<DesignSpec> specs;
            for (const auto& t : curve_designs) specs.push_back(parse_design_spec(t));
            if (specs.empty()) fail(ErrorKind::Parse, "no_designs", "--designs lists no designs");
            for (const auto& s : specs) check_spec(s);
            Files files;
            std::vector<std::string> inputs;
            for (const auto& s : specs) {
                const auto d = build(s, common, true, true, true);
                const auto fr = curvekit::frenet(d.error_curve);
                files.emplace_back(sanitize(s.text) + "_frenet.csv", io::frenet_csv(d.error_curve, fr));
                const auto rep = curvekit::closure_report(d.error_curve);
                out << s.text << " length " << io::format_double(d.error_curve.length()) << " gap "
                    << io::format_double(rep.endpoint_gap) << "\n";
                if (!s.bundle.empty()) inputs.push_back(s.bundle);
            }
            manifest["command"] = "curve";
            manifest["designs"] = curve_designs;
            emit(common, "curve_manifest.json", manifest, files, inputs, out);
            return Ok;
        }
        if (*toy) {
            std::vector<double> phis;
            for (const auto& p : toy_phis) phis.push_back(parse_angle(p));
            if (toy_eps.empty()) toy_eps = bench::log_spaced(1e-3, 1e-1, 21);
            for (double e : toy_eps)
                if (!(std::abs(e) <= 0.5)) fail(ErrorKind::Precondition, "eps_range", "|eps| must not exceed 0.5");
            std::vector<bench::ToyModelResult> rows;
            for (double phi : phis)
                for (double e : toy_eps)
                    for (auto s : {bench::Scenario::Parallel, bench::Scenario::Perpendicular, bench::Scenario::Omega})
                        for (auto g : {bench::GateKind::Holonomic, bench::GateKind::NonHolonomic})
                            rows.push_back(bench::toy_model_fidelities(phi, e, s, g));
            manifest["command"] = "toy";
            manifest["phi"] = phis;
            manifest["eps"] = toy_eps;
            const double cross = bench::omega_noise_crossover();
            manifest["omega_noise_crossover"] = cross;
            emit(common, "toy_manifest.json", manifest, {{"toy.csv", io::toy_csv(rows)}}, {}, out);
            out << "omega_noise_crossover " << io::format_double(cross / pi) << " pi\n";
            bool ok = true;
            for (const auto& r : rows) ok = ok && r.consistent();
            if (!ok) fail(ErrorKind::Numerical, "toy_mismatch", "closed-form and simulated fidelities disagree");
            return Ok;
        }
        if (*pmap) {
            check_common(common);
            const double lo = parse_angle(xi_min), hi = parse_angle(xi_max);
            if (xi_points < 2 || !(hi > lo))
                fail(ErrorKind::Precondition, "bad_axis", "need --xi-max > --xi-min and --points >= 2");
            for (double x : {lo, hi}) check_spec(DesignSpec{"xi", dogsynth::Family::Twisted3D, x, "", ""});
            std::vector<double> xis(xi_points);
            for (std::size_t i = 0; i < xi_points; ++i)
                xis[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(xi_points - 1);
            dogsynth::TwistedOptions o;
            o.grid_points = common.grid_points;
            o.synth.tol = tolerances(common);
            const auto rows = dogsynth::phase_vs_twist(xis, common.omega0, o, common.threads);
            std::vector<double> x, y;
            for (const auto& r : rows) x.push_back(r.xi), y.push_back(r.beta_g);
            const auto fit = num::linear_fit(x, y);
            manifest["command"] = "phase-map";
            manifest["xi"] = {{"min", lo}, {"max", hi}, {"points", xi_points}};
            manifest["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}};
            emit(common, "phase_map_manifest.json", manifest, {{"phase_map.csv", io::phase_map_csv(rows)}}, {}, out);
            out << "r_squared " << io::format_double(fit.r_squared) << "\n";
            return Ok;
        }
        if (*validate) {
            if (!fs::exists(bundle_path))
                fail(ErrorKind::Precondition, "missing_bundle", "no design bundle at '" + bundle_path + "'");
            const auto d = io::read_bundle(bundle_path);
            std::vector<dogsynth::Check> checks;
            try {
                checks = dogsynth::check_design(d);
            } catch (const Error& e) {
                fail(ErrorKind::Numerical, e.code(), std::string("bundle cannot be checked: ") + e.what());
            }
            json report = json::array();
            bool ok = true;
            for (const auto& c : checks) {
                out << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << io::format_double(c.value)
                    << " threshold=" << io::format_double(c.threshold) << "\n";
                ok = ok && c.passed;
                report.push_back({{"check", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}});
            }
            if (!ok) {
                err << json{{"error", "invariant_failed"}, {"kind", "numerical"}, {"checks", report}}.dump() << "\n";
                return NumericalFailure;
            }
            return Ok;
        }
    } catch (const Error& e) {
        static const char* kinds[] = {"parse", "precondition", "numerical", "io"};
        err << json{{"error", e.code()}, {"kind", kinds[static_cast<int>(e.kind())]}, {"message", e.what()}}.dump()
            << "\n";
        switch (e.kind()) {
            case ErrorKind::Parse: return Usage;
            case ErrorKind::Numerical: return NumericalFailure;
            default: return PreconditionFailed;
        }
    } catch (const std::exception& e) {
        err << json{{"error", "internal"}, {"kind", "numerical"}, {"message", e.what()}}.dump() << "\n";
        return NumericalFailure;
    }
    return Usage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, out, err);
}

}  // namespace dogforge::cli
