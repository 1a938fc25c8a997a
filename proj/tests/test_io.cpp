#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "scto/analysis.hpp"
#include "scto/io.hpp"

using namespace scto;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("scto_io_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("format_double round-trips doubles") {
    for (double x : {0.0, 1.0, -1.5, 1.0 / 3.0, 1e-17, 6.02214076e23, -0.1}) {
        CHECK(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("csv round-trip with quoting and CRLF") {
    TempDir tmp;
    std::vector<std::string> header{"a", "b,with comma", "c\"quote"};
    std::vector<std::vector<std::string>> rows{
        {"1", "plain", "x"},
        {"2", "has,comma", "has\"quote"},
        {"3", "", "trailing"},
    };
    write_csv(tmp.file("t.csv"), header, rows);

    std::string raw = read_text_file(tmp.file("t.csv"));
    CHECK(raw.find("\r\n") != std::string::npos);
    CHECK(raw.find("\"b,with comma\"") != std::string::npos);
    CHECK(raw.find("\"c\"\"quote\"") != std::string::npos);

    std::vector<std::string> h2;
    auto rows2 = read_csv(tmp.file("t.csv"), &h2);
    CHECK(h2 == header);
    CHECK(rows2 == rows);
}

TEST_CASE("density csv round-trip") {
    TempDir tmp;
    GridDensity f = random_smooth_density(64, 3);
    write_density_csv(tmp.file("d.csv"), f);
    GridDensity g = read_density_csv(tmp.file("d.csv"));
    REQUIRE(g.n == f.n);
    for (int i = 0; i < f.n; ++i) CHECK(g.values[i] == f.values[i]);

    write_text_file(tmp.file("bad.csv"), "wrong,header\r\n0.5,1\r\n");
    CHECK_THROWS_AS(read_density_csv(tmp.file("bad.csv")), ConfigError);
}

TEST_CASE("transfer matrix binary round-trip and corruption checks") {
    TempDir tmp;
    TransferMatrix M = ulam_matrix(make_doubling_map(), 32);
    write_transfer_matrix(tmp.file("m.bin"), M);
    TransferMatrix R = read_transfer_matrix(tmp.file("m.bin"));
    CHECK(R.n == M.n);
    CHECK(R.entries == M.entries);

    write_text_file(tmp.file("junk.bin"), "NOTAMAT1xxxxxxxxxxxxxxxx");
    CHECK_THROWS_AS(read_transfer_matrix(tmp.file("junk.bin")), ConfigError);

    // truncated payload
    std::string good = read_text_file(tmp.file("m.bin"));
    write_text_file(tmp.file("trunc.bin"), good.substr(0, good.size() / 2));
    CHECK_THROWS_AS(read_transfer_matrix(tmp.file("trunc.bin")), ConfigError);
}

TEST_CASE("config parsing: defaults, round-trip, unknown keys") {
    std::string text = R"({
      "command": "fixed-point",
      "model": {
        "class": "expanding",
        "maps": [{"name": "doubling"}],
        "couplings": [{"name": "product-trig"}],
        "delta": 0.05,
        "grid_n": 256
      },
      "solver": {"method": "picard", "tol": 1e-11},
      "output": {"dir": "runout", "seed": 7}
    })";
    ExperimentConfig c = parse_config(text);
    CHECK(c.command == "fixed-point");
    CHECK(c.maps.size() == 1);
    CHECK(c.maps[0].name == "doubling");
    CHECK(c.delta == 0.05);
    CHECK(c.grid_n == 256);
    CHECK(c.solver == "picard");
    CHECK(c.tol == 1e-11);
    CHECK(c.out_dir == "runout");
    CHECK(c.seed == 7);
    // untouched defaults
    CHECK(c.max_iter == 20000);
    CHECK(c.basis_degree == 4);
    CHECK(c.observable == "cos:1");

    // serialize -> parse -> serialize is the identity
    std::string s1 = serialize_config(c);
    ExperimentConfig c2 = parse_config(s1);
    std::string s2 = serialize_config(c2);
    CHECK(s1 == s2);

    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"command":"x","model":{"grid_n":4},"bogus":1})"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"command":"x","model":{"grid_n":4,"wat":1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model":{"grid_n":4}})"), ConfigError);
}

TEST_CASE("model builder: valid specs and rejection of unknown names") {
    CHECK(build_map({"doubling", 0}).branches.size() == 2);
    CHECK(build_map({"tent", 0}).interval_map);
    CHECK_THROWS_AS(build_map({"squaring", 0}), ConfigError);
    CHECK(!build_coupling({"sine-difference", {}}).separable.empty());
    CHECK_THROWS_AS(build_coupling({"mystery", {}}), ConfigError);
    CHECK(!build_noise({"none", 0}, 64).has_value());
    CHECK(build_noise({"gaussian", 0.1}, 64).has_value());
    CHECK_THROWS_AS(build_noise({"cauchy", 0.1}, 64), ConfigError);

    ExperimentConfig c;
    c.system_class = "additive-noise-circle";
    c.maps = {{"doubling", 0}};
    c.couplings = {{"product-trig", {}}};
    c.noise = {"gaussian", 0.1};
    c.delta = 0.02;
    c.grid_n = 128;
    SelfConsistentModel m = build_model(c);
    CHECK(m.cls == SystemClass::AdditiveNoiseCircle);
    CHECK(m.noise.has_value());

    c.noise = {"none", 0};
    CHECK_THROWS_AS(build_model(c), ConfigError);
}

TEST_CASE("observables") {
    auto c2 = build_observable("cos:2", 8);
    for (int i = 0; i < 8; ++i)
        CHECK(c2[i] == doctest::Approx(std::cos(2 * kTwoPi * (i + 0.5) / 8)));
    auto s1 = build_observable("sin:1", 8);
    for (int i = 0; i < 8; ++i)
        CHECK(s1[i] == doctest::Approx(std::sin(kTwoPi * (i + 0.5) / 8)));
    auto id = build_observable("identity", 4);
    CHECK(id[0] == doctest::Approx(0.125));
    CHECK_THROWS_AS(build_observable("tan:1", 8), ConfigError);
    CHECK_THROWS_AS(build_observable("cos:x", 8), ConfigError);
}

TEST_CASE("svg plot emits one polyline per series") {
    TempDir tmp;
    PlotSeries a{"alpha", {0, 1, 2}, {0.0, 1.0, 0.5}};
    PlotSeries b{"beta", {0, 1, 2}, {1.0, 0.0, 0.25}};
    write_svg_plot(tmp.file("p.svg"), {a, b}, "demo");
    std::string svg = read_text_file(tmp.file("p.svg"));
    CHECK(svg.find("<svg") != std::string::npos);
    std::size_t count = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++count;
        pos += 9;
    }
    CHECK(count == 2);
    CHECK(svg.find("alpha") != std::string::npos);
    CHECK(svg.find("beta") != std::string::npos);
}

TEST_CASE("fnv1a is stable and sensitive") {
    CHECK(fnv1a_hash("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a_hash("a") != fnv1a_hash("b"));
    CHECK(fnv1a_hash("abc") == fnv1a_hash("abc"));
}
