#include "dogforge/io.hpp"

#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

using namespace dogforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dogforge_io_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const dogsynth::DogDesign& small_design() {
    static const auto d = dogsynth::twisted_3d(pi / 2000, 1.0, dogsynth::TwistedOptions{4001});
    return d;
}

}  // namespace

TEST(Numbers, ShortestFormRoundTripsBitExactly) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::uint64_t> bits;
    int checked = 0;
    while (checked < 5000) {
        const std::uint64_t b = bits(rng);
        double v;
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v)) continue;
        const double back = io::parse_double(io::format_double(v));
        EXPECT_EQ(std::memcmp(&v, &back, sizeof v), 0) << io::format_double(v);
        ++checked;
    }
    EXPECT_EQ(io::format_double(0.1), "0.1");
    EXPECT_THROW(io::parse_double("1.5x"), Error);
    EXPECT_THROW(io::parse_double(""), Error);
}

TEST(Hash, GitBlobHashesOfKnownContent) {
    // `git hash-object` of an empty file and of "hello\n".
    EXPECT_EQ(io::git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    EXPECT_EQ(io::git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Files, AtomicWriteReplacesContentAndLeavesNoTemporary) {
    const auto dir = scratch_dir("atomic");
    const auto file = dir / "sub" / "x.txt";
    io::write_atomic(file, "first");
    io::write_atomic(file, "second");
    EXPECT_EQ(io::read_file(file), "second");
    std::size_t entries = 0;
    for (const auto& e : fs::directory_iterator(file.parent_path())) {
        ++entries;
        EXPECT_EQ(e.path().filename(), "x.txt");
    }
    EXPECT_EQ(entries, 1u);
    try {
        io::read_file(dir / "missing.txt");
        FAIL() << "expected io_error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
    fs::remove_all(dir);
}

TEST(Csv, CurveRoundTripIsBitExact) {
    const auto& c = small_design().error_curve;
    const auto text = io::curve_csv(c);
    const auto back = io::parse_curve_csv(text);
    ASSERT_EQ(back.size(), c.size());
    EXPECT_EQ(back.grid, c.grid);
    for (std::size_t k = 0; k < c.size(); ++k) {
        EXPECT_EQ(back.points[k], c.points[k]);
        if (c.has_tangent()) EXPECT_EQ(back.tangent[k], c.tangent[k]);
    }
    EXPECT_EQ(io::curve_csv(back), text);
}

TEST(Csv, MalformedCurveIsRejected) {
    EXPECT_THROW(io::parse_curve_csv("t,x,y\n0,1,2\n"), Error);
    EXPECT_THROW(io::parse_curve_csv("t,x,y,z\n0,0,0,0\n0.1,1,2\n"), Error);
    EXPECT_THROW(io::parse_curve_csv("t,x,y,z\n0,0,0,0\n0.1,a,0,0\n"), Error);
}

TEST(Csv, TablesHaveHeadersAndOneRowPerSample) {
    const auto& d = small_design();
    auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
    const auto f = io::fields_csv(d.fields);
    EXPECT_EQ(f.rfind("t,omega,phi,delta", 0), 0u);
    EXPECT_EQ(static_cast<std::size_t>(lines(f)), d.fields.size() + 1);
    const auto p = io::path_csv(d.path);
    EXPECT_EQ(p.rfind("t,theta,phi,alpha,pole", 0), 0u);
    EXPECT_EQ(static_cast<std::size_t>(lines(p)), d.path.size() + 1);
}

TEST(Unitary, FloatsRoundTrip) {
    const auto u = qdyn::su2_exp(Vec3(0.1, -0.2, 0.3), 1.7);
    const auto v = io::unitary_to_floats(u);
    ASSERT_EQ(v.size(), 8u);
    EXPECT_EQ(io::unitary_from_floats(v), u);
    EXPECT_THROW(io::unitary_from_floats({1, 2, 3}), Error);
}

TEST(Bundle, JsonRoundTripPreservesEverything) {
    const auto& d = small_design();
    const auto text = io::design_json(d);
    const auto back = io::parse_design_json(text);
    EXPECT_EQ(back.family, d.family);
    EXPECT_EQ(back.params.xi, d.params.xi);
    EXPECT_EQ(back.fields.omega, d.fields.omega);
    EXPECT_EQ(back.fields.phi, d.fields.phi);
    EXPECT_EQ(back.fields.delta, d.fields.delta);
    EXPECT_EQ(back.fields.breaks, d.fields.breaks);
    EXPECT_EQ(back.path.theta, d.path.theta);
    EXPECT_EQ(back.path.breaks, d.path.breaks);
    EXPECT_EQ(back.beta_g, d.beta_g);
    EXPECT_EQ(back.error_curve.points, d.error_curve.points);
    EXPECT_EQ(io::design_json(back), text);
}

TEST(Bundle, DirectoryRoundTripAndChecksStillPass) {
    const auto dir = scratch_dir("bundle");
    const auto files = io::write_bundle(dir, small_design(), "tw");
    ASSERT_FALSE(files.empty());
    for (const auto& f : files) EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto back = io::read_bundle(dir / "tw.json");
    for (const auto& c : dogsynth::check_design(back)) EXPECT_TRUE(c.passed) << c.name;
    fs::remove_all(dir);
}

TEST(Bundle, CorruptInputIsReported) {
    auto code = [](const std::string& text) {
        try {
            io::parse_design_json(text);
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::Parse);
            return e.code();
        }
        return std::string("no error");
    };
    EXPECT_EQ(code("{not json"), "corrupt_bundle");
    EXPECT_EQ(code(R"({"format": "something-else"})"), "corrupt_bundle");
    auto text = io::design_json(small_design());
    // Truncating the omega array breaks the grid agreement.
    const auto pos = text.find("\"omega\"");
    ASSERT_NE(pos, std::string::npos);
    const auto open = text.find('[', pos);
    const auto comma = text.find(',', open);
    text.erase(open + 1, comma - open);
    EXPECT_EQ(code(text), "corrupt_bundle");
}

TEST(Reports, PhaseReportJson) {
    holonomy::PhaseReport r;
    r.total = 0.5;
    r.dynamical = 0.25;
    r.geometric = 0.25;
    const auto s = io::phase_report_json(r);
    EXPECT_NE(s.find("\"frame\": \"lab\""), std::string::npos);
    EXPECT_NE(s.find("\"geometric\": 0.25"), std::string::npos);
}
