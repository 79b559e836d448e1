#pragma once

// Plain-text persistence: CSV tables, JSON design bundles, sweep manifests.
// Every float is written in shortest round-trip form, so reading a file back
// reproduces the in-memory values bit for bit.

#include "dogforge/bench.hpp"
#include "dogforge/common.hpp"
#include "dogforge/curvekit.hpp"
#include "dogforge/dogsynth.hpp"
#include "dogforge/holonomy.hpp"
#include "dogforge/qdyn.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dogforge::io {

std::string format_double(double v);
double parse_double(std::string_view s);

// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Git blob hash ("blob <len>\0" + content), hex encoded.
std::string git_blob_sha1(std::string_view content);

// t,x,y,z[,tx,ty,tz]
std::string curve_csv(const curvekit::SpaceCurve& curve);
curvekit::SpaceCurve parse_curve_csv(std::string_view text, std::string label = {});
// t,x,y,z,tx,ty,tz,kappa,tau,tau_defined
std::string frenet_csv(const curvekit::SpaceCurve& curve, const curvekit::FrenetData& frenet);
// t,omega,phi,delta (right-hand values at breaks)
std::string fields_csv(const qdyn::ControlFields& fields);
// t,theta,phi,alpha,pole
std::string path_csv(const holonomy::BlochPath& path);
// axis,label1,label2,...
std::string sweep_csv(const bench::FidelitySweep& sweep);
std::string toy_csv(const std::vector<bench::ToyModelResult>& rows);
std::string phase_map_csv(const std::vector<dogsynth::PhasePoint>& rows);

// Row-major re/im pairs of the four entries.
std::vector<double> unitary_to_floats(const Unitary2& u);
Unitary2 unitary_from_floats(const std::vector<double>& v);

std::string design_json(const dogsynth::DogDesign& design);
dogsynth::DogDesign parse_design_json(std::string_view text);

// design.json plus curve.csv, fields.csv and path.csv in `dir`. Returns the
// written file names relative to `dir`.
std::vector<std::string> write_bundle(const std::filesystem::path& dir, const dogsynth::DogDesign& design,
                                      const std::string& stem = "design");
// Accepts the bundle directory or its JSON file.
dogsynth::DogDesign read_bundle(const std::filesystem::path& path);

std::string phase_report_json(const holonomy::PhaseReport& report);

}  // namespace dogforge::io
