#include "doctest.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "nlq/cache.hpp"
#include "nlq/state_io.hpp"
#include "nlq/sweep.hpp"
#include "test_util.hpp"

using namespace nlq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) out.push_back(line);
    return out;
}

std::vector<std::string> fields_of(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string f;
    while (std::getline(is, f, ',')) out.push_back(f);
    return out;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const char* tag) {
        path = fs::temp_directory_path() / (std::string("nlq_") + tag + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("double formatting round trips at 17 digits") {
    std::mt19937_64 rng(401);
    std::uniform_real_distribution<double> uni(-10.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        const double v = std::ldexp(uni(rng), int(rng() % 64) - 32);
        const std::string s = format_double(v, 17);
        const double back = std::strtod(s.c_str(), nullptr);
        CHECK(std::memcmp(&v, &back, sizeof v) == 0);
    }
    CHECK(format_double(0.25, 10) == "0.25");
    CHECK(format_double(1.0 / 3.0, 10) == "0.3333333333");
}

TEST_CASE("preset strings build the expected states") {
    CHECK((parse_state_spec("preset:bell").mat() - bell_state().mat()).max_abs() < 1e-15);
    CHECK((parse_state_spec("preset:pure-theta:0.3").mat() - pure_theta(0.3).mat()).max_abs() <
          1e-15);
    CHECK((parse_state_spec("preset:mems:0.5").mat() - mems(0.5).mat()).max_abs() < 1e-15);
    CHECK((parse_state_spec("preset:ghz3:1.2:0.7").mat() - ghz_two_qutrit(1.2, 0.7).mat())
              .max_abs() < 1e-15);
    const auto noise = parse_state_spec("preset:noise:6");
    CHECK(noise.dims().a == 2);
    CHECK(noise.dims().b == 3);
}

TEST_CASE("bad preset strings are rejected with a reason") {
    CHECK_THROWS_AS(parse_state_spec("preset:unknown"), std::invalid_argument);
    CHECK_THROWS_AS(parse_state_spec("preset:bell:3"), std::invalid_argument);
    CHECK_THROWS_AS(parse_state_spec("preset:pure-theta"), std::invalid_argument);
    CHECK_THROWS_AS(parse_state_spec("preset:pure-theta:abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_state_spec("preset:mems:1.5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_state_spec("preset:noise:7"), std::invalid_argument);
    CHECK_THROWS_AS(parse_state_spec("preset:noise:4.5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_state_spec("/nonexistent/state.json"), std::invalid_argument);
}

TEST_CASE("pure state files match their presets") {
    const std::string text =
        "{\"dims\":[2,2],\"kind\":\"pure\","
        "\"amplitudes\":[[1,0],[0,0],[0,0],[1,0]]}";
    const auto s = parse_state_json(text);
    CHECK((s.mat() - bell_state().mat()).max_abs() < 1e-15);
}

TEST_CASE("mixed state files validate before loading") {
    const std::string good =
        "{\"dims\":[2,2],\"kind\":\"mixed\",\"matrix\":["
        "[[0.25,0],[0,0],[0,0],[0,0]],"
        "[[0,0],[0.25,0],[0,0],[0,0]],"
        "[[0,0],[0,0],[0.25,0],[0,0]],"
        "[[0,0],[0,0],[0,0],[0.25,0]]]}";
    const auto s = parse_state_json(good);
    CHECK(s.purity() == doctest::Approx(0.25).epsilon(1e-12));

    // same matrix scaled to trace 0.9 must name the defect
    std::string short_trace = good;
    for (std::string::size_type pos = 0;
         (pos = short_trace.find("0.25", pos)) != std::string::npos;) {
        short_trace.replace(pos, 4, "0.225");
        pos += 5;
    }
    try {
        parse_state_json(short_trace);
        FAIL("short trace accepted");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("trace defect 0.1") != std::string::npos);
    }
}

TEST_CASE("malformed state files carry precise diagnostics") {
    CHECK_THROWS_WITH_AS(parse_state_json("{"),
                         doctest::Contains("state file parse error"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_state_json("[1,2]"), doctest::Contains("top level"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_state_json("{\"dims\":[2],\"kind\":\"pure\"}"),
                         doctest::Contains("dims"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_state_json("{\"dims\":[2,2],\"kind\":\"pure\",\"amplitudes\":[[1,0]]}"),
        doctest::Contains("expected 4 amplitudes"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_state_json("{\"dims\":[2,2],\"kind\":\"thermal\"}"),
                         doctest::Contains("pure"), std::invalid_argument);
}

TEST_CASE("state serialization round trips exactly") {
    std::mt19937_64 rng(402);
    const auto rho = testutil::random_density({2, 3}, rng);
    const auto back = parse_state_json(state_to_json(rho));
    CHECK(back.dims().a == 2);
    CHECK(back.dims().b == 3);
    CHECK((back.mat() - rho.mat()).max_abs() == 0.0);
}

TEST_CASE("results cache hits, keys on options, survives corruption") {
    TempDir dir("cache");
    REQUIRE(setenv("NLQ_CACHE_DIR", dir.path.c_str(), 1) == 0);

    const auto rho = mems(0.5);
    bool hit = false;
    const auto first = cached_quantify(rho, {2, 2}, {}, &hit);
    CHECK(!hit);
    const auto second = cached_quantify(rho, {2, 2}, {}, &hit);
    CHECK(hit);
    CHECK(std::memcmp(&first.lambda, &second.lambda, sizeof(double)) == 0);
    CHECK(first.iterations == second.iterations);
    REQUIRE(first.witness.rows() == second.witness.rows());
    CHECK((first.witness - second.witness).max_abs() == 0.0);

    // different tolerance, then different mode: both recompute
    QuantifyOptions loose;
    loose.gap_tol = 1e-7;
    cached_quantify(rho, {2, 2}, loose, &hit);
    CHECK(!hit);
    QuantifyOptions ppt;
    ppt.mode = ExtensionMode::ppt_quasi;
    cached_quantify(rho, {2, 2}, ppt, &hit);
    CHECK(!hit);

    // clobber every entry; lookups must fall back to recomputation
    for (const auto& entry : fs::directory_iterator(dir.path)) {
        std::ofstream out(entry.path(), std::ios::binary | std::ios::trunc);
        out << "garbage";
    }
    const auto third = cached_quantify(rho, {2, 2}, {}, &hit);
    CHECK(!hit);
    CHECK(std::memcmp(&first.lambda, &third.lambda, sizeof(double)) == 0);
    const auto fourth = cached_quantify(rho, {2, 2}, {}, &hit);
    CHECK(hit);
    CHECK(std::memcmp(&first.lambda, &fourth.lambda, sizeof(double)) == 0);

    REQUIRE(unsetenv("NLQ_CACHE_DIR") == 0);
    cached_quantify(rho, {2, 2}, {}, &hit);
    CHECK(!hit);
}

TEST_CASE("pure family sweep emits the expected grid") {
    TempDir dir("sweep2a");
    SweepOptions opts;
    opts.experiment = Experiment::fig2a;
    opts.points = 5;
    opts.out_dir = dir.path.string();
    opts.threads = 2;

    const auto outcome = run_sweep(opts);
    REQUIRE(outcome.files.size() == 1);
    CHECK(outcome.rows == 5);
    CHECK(outcome.optimal_rows == 5);

    const auto text = slurp(outcome.files[0]);
    const auto lines = lines_of(text);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == "theta,n22,chsh_norm,eof,status");

    const auto first = fields_of(lines[1]);
    REQUIRE(first.size() == 5);
    CHECK(std::stod(first[0]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::stod(first[1]) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(std::stod(first[2]) == doctest::Approx(2.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-8));
    CHECK(first[4] == "optimal");

    const auto mid = fields_of(lines[3]);  // theta = pi/4
    CHECK(std::stod(mid[1]) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    CHECK(std::stod(mid[2]) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::stod(mid[3]) == doctest::Approx(1.0).epsilon(1e-6));

    // same grid again on a different pool size: identical bytes
    TempDir dir2("sweep2a_again");
    opts.out_dir = dir2.path.string();
    opts.threads = 4;
    const auto outcome2 = run_sweep(opts);
    CHECK(slurp(outcome2.files[0]) == text);
}

TEST_CASE("mixed family sweep columns") {
    TempDir dir("sweep2b");
    SweepOptions opts;
    opts.experiment = Experiment::fig2b;
    opts.points = 4;
    opts.out_dir = dir.path.string();

    const auto outcome = run_sweep(opts);
    const auto lines = lines_of(slurp(outcome.files[0]));
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "gamma,n22,chsh_norm,eof,status");
    const auto last = fields_of(lines[4]);
    CHECK(std::stod(last[0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::stod(last[1]) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("violation column mode zeroes sub-classical rows") {
    TempDir dir("sweepviol");
    SweepOptions opts;
    opts.experiment = Experiment::fig2b;
    opts.points = 3;
    opts.out_dir = dir.path.string();
    opts.chsh_violation = true;

    const auto outcome = run_sweep(opts);
    const auto lines = lines_of(slurp(outcome.files[0]));
    REQUIRE(lines.size() == 4);
    // gamma = 0 and 0.5 sit below the classical bound, gamma = 1 saturates
    CHECK(std::stod(fields_of(lines[1])[2]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::stod(fields_of(lines[2])[2]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::stod(fields_of(lines[3])[2]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("qutrit sweep writes one file per cut") {
    TempDir dir("sweep3");
    SweepOptions opts;
    opts.experiment = Experiment::fig3;
    opts.points = 2;
    opts.out_dir = dir.path.string();

    const auto outcome = run_sweep(opts);
    REQUIRE(outcome.files.size() == 3);
    CHECK(outcome.rows == 6);
    CHECK(fs::path(outcome.files[0]).filename() == "fig3_xi_pi6.csv");
    CHECK(fs::path(outcome.files[1]).filename() == "fig3_xi_pi3.csv");
    CHECK(fs::path(outcome.files[2]).filename() == "fig3_xi_pi2.csv");

    const auto lines = lines_of(slurp(outcome.files[2]));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "xi,beta,n22,cglmp_norm,entropy_norm,status");
    const auto row = fields_of(lines[1]);
    REQUIRE(row.size() == 6);
    CHECK(std::stod(row[0]) == doctest::Approx(M_PI / 2).epsilon(1e-9));
    CHECK(std::stod(row[1]) == doctest::Approx(0.0).epsilon(1e-12));
    // beta = 0 at xi = pi/2 is the product |00>: nothing to quantify
    CHECK(std::stod(row[2]) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(std::stod(row[4]) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("custom sweep ranges") {
    TempDir dir("sweepc");
    SweepOptions opts;
    opts.experiment = Experiment::custom;
    opts.family = "mems";
    opts.points = 3;
    opts.range_lo = 0.3;
    opts.range_hi = 0.6;
    opts.out_dir = dir.path.string();

    const auto outcome = run_sweep(opts);
    REQUIRE(outcome.files.size() == 1);
    CHECK(fs::path(outcome.files[0]).filename() == "custom_mems.csv");
    const auto lines = lines_of(slurp(outcome.files[0]));
    REQUIRE(lines.size() == 4);
    CHECK(std::stod(fields_of(lines[1])[0]) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(std::stod(fields_of(lines[3])[0]) == doctest::Approx(0.6).epsilon(1e-12));

    SweepOptions bad = opts;
    bad.family = "unknown";
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    bad = opts;
    bad.points = 1;
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
}
