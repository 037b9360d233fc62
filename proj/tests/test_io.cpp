#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "pmc/io.hpp"
#include "pmc/rb9d.hpp"

using namespace pmc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() / ("pmc_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

std::string read_all(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_all(const std::string& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

Trajectory sample_trajectory(bool complex) {
    std::mt19937_64 rng(91);
    Trajectory t = oracle::random_trajectory(rng, 3, 17, 0.1234567);
    t.t0 = -1.0 / 3;
    if (!complex) t.samples = t.samples.real().cast<cplx>();
    return t;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Config;
}

}  // namespace

TEST_SUITE("cli-io") {
    TEST_CASE("binary trajectories round trip bit for bit") {
        TempDir tmp;
        for (bool complex : {false, true}) {
            Trajectory t = sample_trajectory(complex);
            const std::string p = tmp / "a.pmt";
            write_trajectory(p, t);
            CHECK(trajectory_is_complex(p) == complex);
            Trajectory r = read_trajectory(p);
            CHECK(r.dt == t.dt);
            CHECK(r.t0 == t.t0);
            CHECK(r.samples == t.samples);
        }
    }

    TEST_CASE("truncated files report the offset") {
        TempDir tmp;
        const std::string p = tmp / "t.pmt";
        write_trajectory(p, sample_trajectory(false));
        std::string bytes = read_all(p);
        write_all(p, bytes.substr(0, 100));
        try {
            read_trajectory(p);
            FAIL("expected MissingInput");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::MissingInput);
            CHECK(std::string(e.what()).find("offset 100") != std::string::npos);
        }
        CHECK(kind_of([&] { read_trajectory(tmp / "absent.pmt"); }) == ErrorKind::MissingInput);
    }

    TEST_CASE("corrupted payload and flag mismatch are format errors") {
        TempDir tmp;
        const std::string p = tmp / "c.pmt";
        write_trajectory(p, sample_trajectory(true));
        CHECK(kind_of([&] { read_trajectory(p, false); }) == ErrorKind::Format);
        std::string bytes = read_all(p);
        bytes[80] ^= 0x10;
        write_all(p, bytes);
        CHECK(kind_of([&] { read_trajectory(p); }) == ErrorKind::Format);
        write_all(p, "not a trajectory file at all, but long enough to hold a header..........");
        CHECK(kind_of([&] { read_trajectory(p); }) == ErrorKind::Format);
    }

    TEST_CASE("CSV trajectories round trip exactly") {
        TempDir tmp;
        for (bool complex : {false, true}) {
            Trajectory t = sample_trajectory(complex);
            const std::string p = tmp / "a.csv";
            save_trajectory(p, t);
            Trajectory r = load_trajectory(p);
            CHECK(r.dt == t.dt);
            CHECK(r.t0 == t.t0);
            CHECK(r.samples == t.samples);
        }
    }

    TEST_CASE("model files round trip") {
        TempDir tmp;
        QuadraticModel m = rb9d_build({});
        CVec x0 = CVec::LinSpaced(9, 0.1, 0.9);
        write_model(tmp / "rb.ini", m, &x0);
        CVec y0;
        QuadraticModel r = read_model(tmp / "rb.ini", &y0);
        CHECK(r.linear == m.linear);
        REQUIRE(r.bilinear.size() == m.bilinear.size());
        for (size_t e = 0; e < m.bilinear.size(); ++e) {
            CHECK(r.bilinear[e].i == m.bilinear[e].i);
            CHECK(r.bilinear[e].value == m.bilinear[e].value);
        }
        CHECK(y0 == x0);
        CVec y = CVec::Constant(9, 0.3);
        CHECK(r.rhs(y) == m.rhs(y));
    }

    TEST_CASE("eigen model and parameterization files round trip") {
        TempDir tmp;
        QuadraticModel m = rb9d_build({});
        CVec mean = oracle::rb_convective_state();
        QuadraticModel fl = fluctuation_model(m, mean);
        EigenModel em = to_eigen_model(fl, decompose(fl, 5));
        write_eigen_model(tmp / "em.ini", em, &mean);
        CVec mean_back;
        EigenModel er = read_eigen_model(tmp / "em.ini", &mean_back);
        CHECK(mean_back == mean);
        CHECK(er.beta == em.beta);
        CHECK(er.basis.right == em.basis.right);
        CVec y = CVec::LinSpaced(9, -1, 1);
        CHECK(er.rhs(y) == em.rhs(y));

        Parameterization p = lia_build(em, {0.25, 0.5, 1.0 / 3, 1.0 / 3});
        write_parameterization(tmp / "p.ini", p, tmp / "em.ini");
        ParameterizationFile f = read_parameterization_file(tmp / "p.ini");
        CHECK(f.family == Family::LIA);
        CHECK(f.taus == p.taus);
        Parameterization q = build_from_file(f, er);
        CVec xi = CVec::LinSpaced(5, 0.2, 0.6);
        CHECK(q.eval(xi) == p.eval(xi));

        EigenModel other = em;
        other.cutoff = 3;
        CHECK(kind_of([&] { build_from_file(f, other); }) == ErrorKind::BasisMismatch);
    }

    TEST_CASE("malformed INI reports the line") {
        TempDir tmp;
        write_all(tmp / "bad.ini", "[model]\ndim = 2\n[linear]\nr1 = 1 0\nr2 = 0 oops\n");
        try {
            read_model(tmp / "bad.ini");
            FAIL("expected Config");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Config);
            CHECK(std::string(e.what()).find(":5:") != std::string::npos);
        }
    }

    TEST_CASE("output paths honor the data directory") {
        TempDir tmp;
        ::setenv("PM_CLOSURE_DATA_DIR", tmp.dir.c_str(), 1);
        CHECK(output_path("x/y.csv") == (tmp.dir / "x/y.csv").string());
        CHECK(output_path("/abs/z.csv") == "/abs/z.csv");
        ::unsetenv("PM_CLOSURE_DATA_DIR");
        CHECK(output_path("x/y.csv") == "x/y.csv");
    }

    TEST_CASE("manifest records config hash, seed and versions") {
        TempDir tmp;
        const std::string cfg = R"({"r":14.1,"m":5})";
        write_manifest(tmp / "run/manifest.json", cfg, 42, "pmc reproduce rb-pd");
        auto j = nlohmann::json::parse(read_all(tmp / "run/manifest.json"));
        CHECK(j["seed"] == 42);
        CHECK(j["command"] == "pmc reproduce rb-pd");
        CHECK(j["config"]["m"] == 5);
        char hash[20];
        std::snprintf(hash, sizeof hash, "crc32:%08x", crc32_of(nlohmann::json::parse(cfg).dump()));
        CHECK(j["config_hash"] == hash);
        CHECK(j["versions"].contains("eigen"));
        CHECK(j["versions"].contains("fftw"));
    }

    TEST_CASE("CRC32 check value") { CHECK(crc32_of("123456789") == 0xCBF43926u); }
}
