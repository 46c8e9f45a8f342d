#include "doctest.h"
#include "sew/workbench.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sew;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
    Json json() const { return Json::parse(out); }
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "sew_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("usage and errors") {
    SUBCASE("no arguments") {
        const auto r = cli({});
        CHECK(r.code == kExitUsage);
        CHECK(r.err.find("Usage") != std::string::npos);
    }
    SUBCASE("unknown subcommand") {
        const auto r = cli({"frobnicate"});
        CHECK(r.code == kExitUsage);
        CHECK(r.err.find("Usage") != std::string::npos);
    }
    CHECK(cli({"residual", "--field", "no-such-field"}).code == kExitUsage);
    CHECK(cli({"residual", "--field", "name=sinsin; params={p:"}).code == kExitUsage);
    CHECK(cli({"residual", "--field", "sinsin", "--p"}).code == kExitUsage);
    CHECK(cli({"residual"}).code == kExitUsage);
    CHECK(cli({"counterexample", "--orders", "x"}).code == kExitUsage);
    CHECK(cli({"moving-plane", "--field", "sinsin"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("spec hash") {
    CHECK(spec_hash("") == "cbf29ce484222325");
    CHECK(spec_hash("a") == "af63dc4c8601ec8c");
}

TEST_CASE("residual and bracket") {
    const auto r = cli({"residual", "--field", "sinsin", "--no-timestamp"});
    REQUIRE(r.code == kExitOk);
    const Json j = r.json();
    CHECK(j["sup_residual"].get<double>() <= 1e-10);
    CHECK(j["field"] == "sinsin");
    CHECK(j["resolution"] == 256);
    CHECK(j.contains("l2_residual"));
    CHECK(j.contains("scheme"));
    CHECK(j["version"] == kToolVersion);
    CHECK(j["spec_hash"] == spec_hash(j["spec"].get<std::string>()));
    CHECK(j["tolerances"].contains("steady"));
    CHECK_FALSE(j.contains("timestamp"));
    CHECK(cli({"residual", "--field", "sinsin"}).json().contains("timestamp"));

    // Parameters as trailing flags.
    const Json p = cli({"residual", "--field", "radial-poly", "--p", "3", "--no-timestamp"}).json();
    CHECK(p["spec"] == "name=radial-poly; params={p:3}");

    const Json fd = cli({"bracket", "--field", "sinsin", "--scheme", "fd", "--resolution", "64"}).json();
    CHECK(fd["scheme"] == "fd6-centered");
    CHECK(fd["sup_residual"].get<double>() <= 1e-8);
    // {sin x sin y, cos y} = sin x sin^2 y.
    const Json g = cli({"bracket", "--field", "sinsin", "--g", "shear"}).json();
    CHECK(g["sup_residual"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("flux and critical set") {
    const auto r = cli({"flux", "--field", "radial-poly", "--p", "2", "--levels", "32", "--endpoint-window", "0.1"});
    REQUIRE(r.code == kExitOk);
    const Json j = r.json();
    CHECK(j["verdict"] == "single-valued");
    CHECK(j["range"][0].get<double>() == doctest::Approx(0.0));
    CHECK(j["range"][1].get<double>() == doctest::Approx(1.0));
    CHECK(j["branch_table"].size() >= 16);
    bool have_a = false;
    for (const auto& p : j["puiseux"])
        if (p["endpoint"] == "a") {
            have_a = true;
            CHECK(p["k0"] == 2);
            CHECK(p["coefficients"][0].get<double>() == doctest::Approx(8.0).epsilon(1e-6));
        }
    CHECK(have_a);

    const Json c = cli({"critical-set", "--field", "sin2sin2", "--resolution", "96"}).json();
    int curves = 0;
    for (const auto& comp : c["components"])
        if (comp["kind"] == "arc" || comp["kind"] == "loop") {
            ++curves;
            CHECK(comp["degree"] == 2);
            CHECK(comp["points"].size() == comp["size"]);
        }
    CHECK(curves > 0);
    CHECK(c["decomposition"]["cells"].size() >= 1);
    CHECK(c.contains("radiality"));
}

TEST_CASE("analyze classifications") {
    SUBCASE("radial-poly is radial and semilinear") {
        const auto r = cli({"analyze", "--field", "radial-poly", "--p", "2", "--no-timestamp"});
        CHECK(r.code == kExitOk);
        const Json j = r.json();
        CHECK(j["classification"] == Json::array({"radial", "semilinear"}));
        CHECK(j["moving_plane"]["verdict"] == "radial");
        CHECK(j["flux"]["verify_residual"].get<double>() <= j["tolerances"]["verify"].get<double>());
    }
    SUBCASE("sinsin is semilinear with F = -2 s") {
        const Json j = cli({"analyze", "--field", "sinsin", "--no-timestamp"}).json();
        CHECK(j["classification"] == Json::array({"semilinear"}));
        CHECK(j["flux"]["F"]["linear_fit"]["slope"].get<double>() == doctest::Approx(-2.0).epsilon(1e-8));
        CHECK(std::abs(j["flux"]["F"]["linear_fit"]["offset"].get<double>()) <= 1e-8);
        CHECK_FALSE(j.contains("moving_plane"));
    }
    SUBCASE("non-steady input") {
        const auto r = cli({"analyze", "--field", "perturbed", "--resolution", "64"});
        CHECK(r.code == kExitNonSteady);
        CHECK(r.json()["classification"] == Json::array({"branch-discrepancy"}));
        CHECK(r.json()["steady"] == false);
    }
    SUBCASE("inconclusive") {
        // Nothing can pass a zero verification threshold and the torus has no moving plane.
        const auto r = cli({"analyze", "--field", "sinsin", "--resolution", "64", "--tol-verify", "0"});
        CHECK(r.code == kExitInconclusive);
        CHECK(r.json()["classification"] == Json::array({"inconclusive"}));
    }
    SUBCASE("ellipse counterexample") {
        const auto r = cli({"analyze", "--field", "counterexample-ellipse", "--Ns", "32", "--no-timestamp"});
        CHECK(r.code == kExitOk);
        const Json j = r.json();
        CHECK(j["classification"] == Json::array({"branch-discrepancy"}));
        CHECK(j["flux"]["branches"].size() == 2);
        int fits = 0;
        for (const auto& p : j["flux"]["puiseux"])
            if (p.contains("branch")) {
                ++fits;
                CHECK(std::abs(p["leading_exponent"].get<double>() - 2.5) <= 0.05);
            }
        CHECK(fits == 2);
        CHECK(j["moving_plane"]["verdict"] == "axis-symmetric");
        CHECK(j["moving_plane"]["axes"].size() == 2);
    }
}

TEST_CASE("determinism and spec files") {
    const auto spec = scratch("disk.spec");
    {
        std::ofstream f(spec);
        f << "# radial eigenfunction\nname=disk-eigen\ndomain={kind:disk,cx:0,cy:0,r:1}\n";
    }
    const auto a = cli({"analyze", spec.string(), "--resolution", "128", "--no-timestamp"});
    const auto b = cli({"analyze", "--spec", spec.string(), "--resolution", "128", "--no-timestamp"});
    REQUIRE(a.code == kExitOk);
    CHECK(a.out == b.out);
    CHECK(a.json()["classification"] == Json::array({"radial", "semilinear"}));

    const auto out = scratch("disk.json");
    const auto rep = run_analyze(spec.string(), 128, out.string(), false);
    CHECK(slurp(out) == a.out);
    CHECK(rep.has(Classification::Radial));

    const auto bad = scratch("bad.spec");
    {
        std::ofstream f(bad);
        f << "params={p:2}\n";
    }
    CHECK(cli({"analyze", bad.string()}).code == kExitUsage);
    CHECK_THROWS_AS(run_analyze(bad.string(), 64, "", false), WorkbenchError);
}

TEST_CASE("data files") {
    SUBCASE("counterexample") {
        const auto grid = scratch("tube.csv"), coef = scratch("coef.csv");
        const auto r = cli({"counterexample", "--curve", "circle", "--delta", "0.3", "--orders", "16,4", "--resolution",
                            "32", "--grid", grid.string(), "--coefficients", coef.string()});
        REQUIRE(r.code == kExitOk);
        const Json j = r.json();
        CHECK(j["series"]["c2_error"].get<double>() <= 1e-12);
        CHECK(j["residual"]["interior"].get<double>() <= 1e-6);
        std::istringstream g(slurp(grid));
        std::string header;
        std::getline(g, header);
        CHECK(header.rfind("# 32 32 ", 0) == 0);
        std::istringstream c(slurp(coef));
        std::string line;
        int rows = 0;
        std::getline(c, line);
        CHECK(line.rfind("k,a0,", 0) == 0);
        while (std::getline(c, line)) ++rows;
        CHECK(rows == 17);
    }
    SUBCASE("fourier file") {
        const auto f = scratch("curve.txt");
        {
            std::ofstream o(f);
            o << "# j cx sx cy sy\n0 0 0 0 0\n1 1.2 0 0 0.9\n2 0.1 0 0 0\n";
        }
        const auto r = cli({"counterexample", "--curve", "fourier-file", "--file", f.string(), "--delta", "0.1",
                            "--orders", "12,0"});
        REQUIRE(r.code == kExitOk);
        CHECK(r.json()["residual"]["interior"].get<double>() <= 1e-6);
    }
    SUBCASE("solve") {
        const auto p = scratch("solve.txt"), grid = scratch("solve.csv");
        {
            std::ofstream o(p);
            o << "F=sqrt\ndomain={kind:disk,cx:0,cy:0,r:1}\nboundary=0\n";
        }
        const auto r = cli({"solve", p.string(), "--grid", grid.string(), "--resolution", "32"});
        REQUIRE(r.code == kExitOk);
        const Json j = r.json();
        CHECK(j["converged"] == true);
        CHECK(j["residual"].get<double>() <= 1e-8);
        CHECK(slurp(grid).rfind("# 32 32 ", 0) == 0);

        const auto q = scratch("solve2.txt");
        {
            std::ofstream o(q);
            o << "F=bessel\nmode=radial\npsi0=1\n";
        }
        const Json k = cli({"solve", q.string()}).json();
        CHECK(std::abs(k["psi_R"].get<double>()) <= 1e-8);

        const auto bad = scratch("solve3.txt");
        {
            std::ofstream o(bad);
            o << "F=cubic\n";
        }
        CHECK(cli({"solve", bad.string()}).code == kExitUsage);
    }
    SUBCASE("moving plane with a region file") {
        const auto f = scratch("square.txt");
        {
            std::ofstream o(f);
            o << "1 0\n0 1\n-1 0\n0 -1\n";
        }
        const Json j = cli({"moving-plane", "--field", "radial-poly", "--p", "2", "--directions", "4", "--region",
                            f.string()})
                           .json();
        CHECK(j["symmetric_directions"] == 4);
        CHECK(j["directions"].size() == 4);
        CHECK(j["directions"][0].contains("profile"));
    }
}
