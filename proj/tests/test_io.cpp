#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "accs/io.hpp"
#include "accs/modelgen.hpp"
#include "oracles.hpp"

using namespace accs;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("accs_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

} // namespace

TEST_CASE("config parses keys, lists and comments", "[io]") {
    auto cfg = Config::from_string(
        "# heading comment\n"
        "n1 = 16  # trailing comment\n"
        "basis= haar\n"
        "C_values = 1, 2,4\n"
        "ratio = 0.25\n"
        "flag = true\n");
    REQUIRE(cfg.get_int("n1") == 16);
    REQUIRE(cfg.get_string("basis") == "haar");
    REQUIRE(cfg.get_int_list("C_values") == std::vector<long long>{1, 2, 4});
    REQUIRE(cfg.get_double("ratio") == 0.25);
    REQUIRE(cfg.get_bool("flag", false));
    cfg.finish();
}

TEST_CASE("config rejects unknown keys, duplicates and malformed lines", "[io]") {
    auto cfg = Config::from_string("a = 1\nmystery = 2\n");
    REQUIRE(cfg.get_int("a") == 1);
    REQUIRE_THROWS_AS(cfg.finish(), ConfigError);

    REQUIRE_THROWS_AS(Config::from_string("a = 1\na = 2\n"), ConfigError);
    REQUIRE_THROWS_AS(Config::from_string("just a line\n"), ConfigError);
    try {
        Config::from_string("ok = 1\nbroken line\n", "test.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("test.cfg:2") != std::string::npos);
    }

    auto bad = Config::from_string("x = notanumber\n");
    REQUIRE_THROWS_AS(bad.get_int("x"), ConfigError);
    auto missing = Config::from_string("");
    REQUIRE_THROWS_AS(missing.get_string("needed"), ConfigError);
    REQUIRE(missing.get_string("needed", "fallback") == "fallback");
}

TEST_CASE("k-space container round-trips bit for bit", "[io]") {
    TempDir dir;
    GridShape shape(4, 4);
    auto eng = make_engine(1);
    KSpaceFile ks;
    ks.shape = shape;
    ks.k = 3;
    ks.omega = gen_sampling_pattern(16, 7, 2);
    ks.Y = complex_gaussian_matrix(7, 2, eng);
    ks.B = gen_subspace_basis(BasisKind::haar, shape, 3, 3).matrix();
    const std::string path = dir.file("data.acsk");
    write_kspace(path, ks);

    const KSpaceFile back = read_kspace(path);
    REQUIRE(back.shape == shape);
    REQUIRE(back.k == 3);
    REQUIRE(back.omega.indices == ks.omega.indices);
    REQUIRE((back.Y - ks.Y).norm() == 0.0);
    REQUIRE(back.B.has_value());
    REQUIRE((*back.B - *ks.B).norm() == 0.0);

    // Without B the flag bit drops and the section is absent.
    ks.B.reset();
    write_kspace(path, ks);
    REQUIRE_FALSE(read_kspace(path).B.has_value());
}

TEST_CASE("k-space reader names the missing section on truncation", "[io]") {
    TempDir dir;
    GridShape shape(8, 1);
    auto eng = make_engine(5);
    KSpaceFile ks;
    ks.shape = shape;
    ks.k = 2;
    ks.omega = gen_sampling_pattern(8, 4, 6);
    ks.Y = complex_gaussian_matrix(4, 2, eng);
    const std::string path = dir.file("full.acsk");
    write_kspace(path, ks);
    const auto full = std::filesystem::file_size(path);

    auto truncate_to = [&](std::size_t n) {
        std::ifstream in(path, std::ios::binary);
        std::vector<char> buf(n);
        in.read(buf.data(), static_cast<std::streamsize>(n));
        const std::string cut = dir.file("cut.acsk");
        std::ofstream out(cut, std::ios::binary);
        out.write(buf.data(), static_cast<std::streamsize>(n));
        return cut;
    };

    try {
        read_kspace(truncate_to(4 + 4 + 20 + 1 + 8)); // half of omega
        FAIL("expected IoError");
    } catch (const IoError& e) {
        REQUIRE(std::string(e.what()).find("omega") != std::string::npos);
    }
    try {
        read_kspace(truncate_to(full - 8)); // part of Y missing
        FAIL("expected IoError");
    } catch (const IoError& e) {
        REQUIRE(std::string(e.what()).find("Y") != std::string::npos);
    }

    // Corrupt magic.
    const std::string bad = dir.file("bad.acsk");
    {
        std::ofstream out(bad, std::ios::binary);
        out.write("NOPE", 4);
        std::vector<char> rest(64, 0);
        out.write(rest.data(), rest.size());
    }
    REQUIRE_THROWS_AS(read_kspace(bad), IoError);
}

TEST_CASE("PGM writer produces the expected bytes for a known ramp", "[io]") {
    TempDir dir;
    // 2 rows x 3 cols, values 0..5 scaled so the max maps to 65535.
    GridShape shape(2, 3);
    Eigen::VectorXd v(6);
    // column-major: (r0,c0) (r1,c0) (r0,c1) (r1,c1) (r0,c2) (r1,c2)
    v << 0, 3, 1, 4, 2, 5;
    const std::string path = dir.file("ramp.pgm");
    write_pgm16(path, shape, v);

    std::ifstream is(path, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    const std::string data = buf.str();
    const std::string header = "P5\n3 2\n65535\n";
    REQUIRE(data.substr(0, header.size()) == header);
    // Raster is row-major: row 0 = (0, 1, 2), row 1 = (3, 4, 5), each
    // scaled by 65535/5 = 13107 and stored big-endian.
    const std::uint16_t want[6] = {0, 13107, 26214, 39321, 52428, 65535};
    REQUIRE(data.size() == header.size() + 12);
    for (int i = 0; i < 6; ++i) {
        const auto hi = static_cast<unsigned char>(data[header.size() + 2 * i]);
        const auto lo = static_cast<unsigned char>(data[header.size() + 2 * i + 1]);
        REQUIRE(((hi << 8) | lo) == want[i]);
    }

    const PgmImage img = read_pgm(path);
    REQUIRE(img.shape == shape);
    for (int i = 0; i < 6; ++i)
        REQUIRE(img.values(i) == Catch::Approx(v(i) / 5.0).margin(1e-4));
}

TEST_CASE("PGM reader validates the header", "[io]") {
    TempDir dir;
    const std::string path = dir.file("bad.pgm");
    {
        std::ofstream os(path, std::ios::binary);
        os << "P6\n2 2\n255\n....";
    }
    REQUIRE_THROWS_AS(read_pgm(path), IoError);
    {
        std::ofstream os(path, std::ios::binary);
        os << "P5\n4 4\n255\nxy"; // truncated raster
    }
    REQUIRE_THROWS_AS(read_pgm(path), IoError);
    REQUIRE_THROWS_AS(read_pgm(dir.file("missing.pgm")), IoError);
}

TEST_CASE("csv cell formatting", "[io]") {
    REQUIRE(csv_num(0.5) == "0.5");
    REQUIRE(csv_num(1.0 / 3.0) == "0.3333333333");
    std::ostringstream os;
    write_csv_row(os, {"a", "b", "1"});
    REQUIRE(os.str() == "a,b,1\n");
}
