#include "dogforge/io.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace dogforge::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        fail(ErrorKind::Parse, "bad_number", "cannot parse number '" + std::string(s) + "'");
    return v;
}

void write_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) fail(ErrorKind::Io, "io_error", "cannot create directory " + path.parent_path().string());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "io_error", "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            fail(ErrorKind::Io, "io_error", "write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        fail(ErrorKind::Io, "io_error", "cannot rename into " + path.string());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "io_error", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string git_blob_sha1(std::string_view content) {
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
    EVP_DigestUpdate(ctx, header.data(), header.size());
    EVP_DigestUpdate(ctx, content.data(), content.size());
    EVP_DigestFinal_ex(ctx, md.data(), &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

namespace {

void row(std::string& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) out += ',';
        out += format_double(v);
        first = false;
    }
    out += '\n';
}

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t a = 0;
    while (true) {
        const std::size_t b = line.find(sep, a);
        out.push_back(line.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a));
        if (b == std::string_view::npos) break;
        a = b + 1;
    }
    return out;
}

std::vector<std::string_view> lines(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto l : split(text, '\n')) {
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        if (l.empty() || l.front() == '#') continue;
        out.push_back(l);
    }
    return out;
}

}  // namespace

std::string curve_csv(const curvekit::SpaceCurve& c) {
    const bool tan = c.has_tangent();
    std::string out = tan ? "t,x,y,z,tx,ty,tz\n" : "t,x,y,z\n";
    for (std::size_t k = 0; k < c.size(); ++k) {
        const auto& p = c.points[k];
        if (tan) {
            const auto& t = c.tangent[k];
            row(out, {c.grid.at(k), p.x(), p.y(), p.z(), t.x(), t.y(), t.z()});
        } else {
            row(out, {c.grid.at(k), p.x(), p.y(), p.z()});
        }
    }
    return out;
}

curvekit::SpaceCurve parse_curve_csv(std::string_view text, std::string label) {
    const auto ls = lines(text);
    if (ls.size() < 2) fail(ErrorKind::Parse, "bad_csv", "curve CSV needs a header and samples");
    const auto header = split(ls[0]);
    const std::size_t cols = header.size();
    if (cols != 4 && cols != 7) fail(ErrorKind::Parse, "bad_csv", "curve CSV must have 4 or 7 columns");
    std::vector<double> t;
    std::vector<Vec3> pts, tan;
    for (std::size_t i = 1; i < ls.size(); ++i) {
        const auto f = split(ls[i]);
        if (f.size() != cols) fail(ErrorKind::Parse, "bad_csv", "row " + std::to_string(i) + " has wrong width");
        t.push_back(parse_double(f[0]));
        pts.emplace_back(parse_double(f[1]), parse_double(f[2]), parse_double(f[3]));
        if (cols == 7) tan.emplace_back(parse_double(f[4]), parse_double(f[5]), parse_double(f[6]));
    }
    auto c = curvekit::SpaceCurve::from_samples(t, std::move(pts), std::move(label));
    c.tangent = std::move(tan);
    return c;
}

std::string frenet_csv(const curvekit::SpaceCurve& c, const curvekit::FrenetData& fr) {
    const auto T = curvekit::derivatives(c, 1);
    std::string out = "t,x,y,z,tx,ty,tz,kappa,tau,tau_defined\n";
    for (std::size_t k = 0; k < c.size(); ++k) {
        const auto& p = c.points[k];
        row(out, {c.grid.at(k), p.x(), p.y(), p.z(), T[k].x(), T[k].y(), T[k].z(), fr.curvature[k], fr.torsion[k],
                  fr.torsion_defined[k] ? 1.0 : 0.0});
    }
    return out;
}

std::string fields_csv(const qdyn::ControlFields& f) {
    std::string out = "t,omega,phi,delta\n";
    for (std::size_t k = 0; k < f.size(); ++k) row(out, {f.grid.at(k), f.omega[k], f.phi[k], f.delta[k]});
    return out;
}

std::string path_csv(const holonomy::BlochPath& p) {
    std::string out = "t,theta,phi,alpha,pole\n";
    for (std::size_t k = 0; k < p.size(); ++k)
        row(out, {p.grid.at(k), p.theta[k], p.phi[k], p.alpha[k], p.pole_flag.empty() ? 0.0 : p.pole_flag[k] * 1.0});
    return out;
}

std::string sweep_csv(const bench::FidelitySweep& s) {
    std::string out = bench::axis_name(s.kind);
    for (const auto& se : s.series) out += "," + se.label;
    out += '\n';
    for (std::size_t i = 0; i < s.axis.size(); ++i) {
        out += format_double(s.axis[i]);
        for (const auto& se : s.series) out += "," + format_double(se.fidelity[i]);
        out += '\n';
    }
    return out;
}

std::string toy_csv(const std::vector<bench::ToyModelResult>& rows) {
    std::string out = "scenario,gate,phi,eps,f_closed_form,f_simulated,tolerance,consistent\n";
    for (const auto& r : rows) {
        out += std::string(bench::scenario_name(r.scenario)) + "," + bench::gate_kind_name(r.gate) + "," +
               format_double(r.phi) + "," + format_double(r.eps) + "," + format_double(r.f_closed_form) + "," +
               format_double(r.f_simulated) + "," + format_double(r.tolerance) + "," +
               (r.consistent() ? "1" : "0") + "\n";
    }
    return out;
}

std::string phase_map_csv(const std::vector<dogsynth::PhasePoint>& rows) {
    std::string out = "xi,beta_g,beta_g_propagated\n";
    for (const auto& r : rows) row(out, {r.xi, r.beta_g, r.beta_g_propagated});
    return out;
}

std::vector<double> unitary_to_floats(const Unitary2& u) {
    return {u(0, 0).real(), u(0, 0).imag(), u(0, 1).real(), u(0, 1).imag(),
            u(1, 0).real(), u(1, 0).imag(), u(1, 1).real(), u(1, 1).imag()};
}

Unitary2 unitary_from_floats(const std::vector<double>& v) {
    if (v.size() != 8) fail(ErrorKind::Parse, "bad_unitary", "unitary needs 8 floats");
    Unitary2 u;
    u << cplx(v[0], v[1]), cplx(v[2], v[3]), cplx(v[4], v[5]), cplx(v[6], v[7]);
    return u;
}

namespace {

json vec3s(const std::vector<Vec3>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({p.x(), p.y(), p.z()});
    return a;
}

std::vector<Vec3> vec3s_from(const json& a) {
    std::vector<Vec3> out;
    for (const auto& p : a) out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
    return out;
}

json grid_json(const Grid& g) { return {{"t0", g.t0}, {"spacing", g.spacing}, {"count", g.count}}; }

Grid grid_from(const json& j) {
    return Grid{j.at("t0").get<double>(), j.at("spacing").get<double>(), j.at("count").get<std::size_t>()};
}

json tolerances_json(const Tolerances& t) {
    return {{"tantrix", t.tantrix}, {"closure", t.closure}, {"kappa_floor", t.kappa_floor}, {"pt", t.pt},
            {"angle", t.angle},     {"area", t.area},       {"straight_run_max", t.straight_run_max}};
}

Tolerances tolerances_from(const json& j) {
    Tolerances t;
    t.tantrix = j.at("tantrix");
    t.closure = j.at("closure");
    t.kappa_floor = j.at("kappa_floor");
    t.pt = j.at("pt");
    t.angle = j.at("angle");
    t.area = j.at("area");
    t.straight_run_max = j.at("straight_run_max");
    return t;
}

}  // namespace

std::string design_json(const dogsynth::DogDesign& d) {
    json j;
    j["format"] = "dogforge-design";
    j["version"] = 1;
    j["family"] = dogsynth::family_name(d.family);
    const auto& p = d.params;
    j["parameters"] = {{"phi0", p.phi0},
                       {"xi", p.xi},
                       {"omega0", p.omega0},
                       {"window", p.window},
                       {"grid_points", p.grid_points},
                       {"shape", p.shape},
                       {"amplitude_scale", p.amplitude_scale},
                       {"inner_center", p.inner_center},
                       {"outer_center", p.outer_center},
                       {"twist_offset", p.twist_offset}};
    j["tolerances"] = tolerances_json(d.tolerances);
    j["beta_g"] = d.beta_g;
    j["beta_g_propagated"] = d.beta_g_propagated;
    j["beta_discrepancy"] = d.beta_discrepancy;
    json rot = json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rot.push_back(d.pre_rotation(r, c));
    j["pre_rotation"] = rot;
    j["gate"] = unitary_to_floats(qdyn::propagate_final(d.fields));

    const auto& c = d.error_curve;
    j["curve"] = {{"label", c.label},   {"grid", grid_json(c.grid)}, {"points", vec3s(c.points)},
                  {"tangent", vec3s(c.tangent)}, {"breaks", c.breaks}};
    const auto& f = d.fields;
    json fb = json::array();
    for (const auto& b : f.breaks)
        fb.push_back({{"index", b.index}, {"omega_before", b.omega_before}, {"phi_before", b.phi_before},
                      {"delta_before", b.delta_before}});
    j["fields"] = {{"grid", grid_json(f.grid)}, {"omega", f.omega}, {"phi", f.phi}, {"delta", f.delta},
                   {"breaks", fb}};
    const auto& pa = d.path;
    json pb = json::array();
    for (const auto& b : pa.breaks)
        pb.push_back({{"index", b.index}, {"phi_before", b.phi_before}, {"alpha_before", b.alpha_before}});
    j["path"] = {{"grid", grid_json(pa.grid)}, {"theta", pa.theta}, {"phi", pa.phi},
                 {"alpha", pa.alpha},          {"pole", pa.pole_flag}, {"breaks", pb}};
    return j.dump(1) + "\n";
}

dogsynth::DogDesign parse_design_json(std::string_view text) {
    dogsynth::DogDesign d;
    try {
        const json j = json::parse(text);
        if (j.at("format") != "dogforge-design")
            fail(ErrorKind::Parse, "corrupt_bundle", "not a design bundle");
        d.family = dogsynth::family_from_name(j.at("family"));
        const auto& p = j.at("parameters");
        d.params.phi0 = p.at("phi0");
        d.params.xi = p.at("xi");
        d.params.omega0 = p.at("omega0");
        d.params.window = p.at("window");
        d.params.grid_points = p.at("grid_points");
        d.params.shape = p.at("shape");
        d.params.amplitude_scale = p.at("amplitude_scale");
        d.params.inner_center = p.at("inner_center");
        d.params.outer_center = p.at("outer_center");
        d.params.twist_offset = p.at("twist_offset");
        d.tolerances = tolerances_from(j.at("tolerances"));
        d.beta_g = j.at("beta_g");
        d.beta_g_propagated = j.at("beta_g_propagated");
        d.beta_discrepancy = j.at("beta_discrepancy");
        const auto& rot = j.at("pre_rotation");
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) d.pre_rotation(r, c) = rot.at(3 * r + c);

        const auto& c = j.at("curve");
        d.error_curve.label = c.at("label");
        d.error_curve.grid = grid_from(c.at("grid"));
        d.error_curve.points = vec3s_from(c.at("points"));
        d.error_curve.tangent = vec3s_from(c.at("tangent"));
        d.error_curve.breaks = c.at("breaks").get<std::vector<std::size_t>>();

        const auto& f = j.at("fields");
        d.fields.grid = grid_from(f.at("grid"));
        d.fields.omega = f.at("omega").get<std::vector<double>>();
        d.fields.phi = f.at("phi").get<std::vector<double>>();
        d.fields.delta = f.at("delta").get<std::vector<double>>();
        for (const auto& b : f.at("breaks"))
            d.fields.breaks.push_back({b.at("index"), b.at("omega_before"), b.at("phi_before"), b.at("delta_before")});

        const auto& pa = j.at("path");
        d.path.grid = grid_from(pa.at("grid"));
        d.path.theta = pa.at("theta").get<std::vector<double>>();
        d.path.phi = pa.at("phi").get<std::vector<double>>();
        d.path.alpha = pa.at("alpha").get<std::vector<double>>();
        d.path.pole_flag = pa.at("pole").get<std::vector<unsigned char>>();
        for (const auto& b : pa.at("breaks"))
            d.path.breaks.push_back({b.at("index"), b.at("phi_before"), b.at("alpha_before")});
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, "corrupt_bundle", std::string("bundle JSON is malformed: ") + e.what());
    }
    if (d.error_curve.size() != d.error_curve.grid.count ||
        (!d.error_curve.tangent.empty() && d.error_curve.tangent.size() != d.error_curve.size()) ||
        d.path.size() != d.path.grid.count || d.path.phi.size() != d.path.size() ||
        d.path.alpha.size() != d.path.size() || d.fields.grid.count != d.fields.size())
        fail(ErrorKind::Parse, "corrupt_bundle", "bundle arrays disagree with their grids");
    try {
        d.fields.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Parse, "corrupt_bundle", std::string("bundle fields invalid: ") + e.what());
    }
    return d;
}

std::vector<std::string> write_bundle(const fs::path& dir, const dogsynth::DogDesign& d, const std::string& stem) {
    const std::vector<std::pair<std::string, std::string>> files = {
        {stem + ".json", design_json(d)},
        {stem + "_curve.csv", curve_csv(d.error_curve)},
        {stem + "_fields.csv", fields_csv(d.fields)},
        {stem + "_path.csv", path_csv(d.path)},
    };
    std::vector<std::string> names;
    for (const auto& [name, content] : files) {
        write_atomic(dir / name, content);
        names.push_back(name);
    }
    return names;
}

dogsynth::DogDesign read_bundle(const fs::path& path) {
    fs::path file = path;
    if (fs::is_directory(path)) file = path / "design.json";
    return parse_design_json(read_file(file));
}

std::string phase_report_json(const holonomy::PhaseReport& r) {
    json j = {{"frame", holonomy::frame_name(r.frame)},
              {"total", r.total},
              {"dynamical", r.dynamical},
              {"geometric", r.geometric}};
    return j.dump(1) + "\n";
}

}  // namespace dogforge::io
