#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "twolayer/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Scratch {
    fs::path dir = fs::temp_directory_path() / ("twolayer-cli-" + std::to_string(::getpid()));
    Scratch() { fs::create_directories(dir); }
    ~Scratch() { fs::remove_all(dir); }
};

int run(const std::string& args) {
    const std::string cmd = std::string(TWOLAYER_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("simulate with t_end = 0 writes only initial rows") {
    Scratch s;
    const fs::path out = s.dir / "t0";
    REQUIRE(run("simulate --t-end 0 --nx0 8 --nx1 6 --out " + out.string()) == 0);
    const std::string m = slurp(out / "matrix.csv");
    const std::string t = slurp(out / "tissue.csv");
    CHECK(m.rfind("t,x,C0_star,C0\n", 0) == 0);
    CHECK(t.rfind("t,x,C1_star,C1,Ci\n", 0) == 0);
    CHECK(lines(m) == 1 + 9);
    CHECK(lines(t) == 1 + 7);
    CHECK(m.find("\n0,0,1,0\n") != std::string::npos);
    CHECK(t.find("\n0,2,0,0,0\n") != std::string::npos);
    for (const char* f : {"metrics.json", "ledger.json", "run.json"}) CHECK(fs::exists(out / f));
}

TEST_CASE("golden CSV rows use 17 significant digits") {
    CHECK(twolayer::format_number(0.1) == "0.10000000000000001");
    CHECK(twolayer::format_number(2.0) == "2");
    CHECK(twolayer::format_number(-0.25) == "-0.25");
}

TEST_CASE("same configuration twice gives identical outputs") {
    Scratch s;
    write(s.dir / "cfg.json", R"({"solver": {"t_end": 5, "dt": 0.05}, "grid": {"nx0": 12, "nx1": 12}})");
    const std::string cfg = " --config " + (s.dir / "cfg.json").string();
    REQUIRE(run("simulate" + cfg + " --out " + (s.dir / "a").string()) == 0);
    REQUIRE(run("simulate" + cfg + " --out " + (s.dir / "b").string()) == 0);
    REQUIRE(run("simulate --config " + (s.dir / "a" / "run.json").string() + " --out " + (s.dir / "c").string()) == 0);
    for (const char* f : {"matrix.csv", "tissue.csv", "metrics.json", "ledger.json"}) {
        CHECK(slurp(s.dir / "a" / f) == slurp(s.dir / "b" / f));
        CHECK(slurp(s.dir / "a" / f) == slurp(s.dir / "c" / f));
    }
    CHECK(twolayer::manifest_without_wall_time(s.dir / "a" / "run.json") ==
          twolayer::manifest_without_wall_time(s.dir / "c" / "run.json"));
    const twolayer::Json manifest = twolayer::Json::parse(slurp(s.dir / "a" / "run.json"));
    CHECK(manifest.at("outputs").at("matrix.csv").get<std::string>() == twolayer::sha256_file(s.dir / "a" / "matrix.csv"));
}

TEST_CASE("analytic writes closed-form fields and the flux mismatch") {
    Scratch s;
    const fs::path out = s.dir / "an";
    REQUIRE(run("analytic --t-end 2 --nx0 10 --nx1 10 --out " + out.string()) == 0);
    CHECK(slurp(out / "analytic.csv").rfind("t,x,layer,C0_star,C0,C1_star,C1,Ci\n", 0) == 0);
    CHECK(slurp(out / "flux_mismatch.csv").rfind("t,matrix_flux,tissue_flux,mismatch\n", 0) == 0);
    const twolayer::Json rep = twolayer::Json::parse(slurp(out / "analytic_report.json"));
    CHECK(rep.at("max_interface_flux_mismatch").get<double>() > 1e-10);
}

TEST_CASE("sweep writes one block per value") {
    Scratch s;
    const fs::path out = s.dir / "sw";
    REQUIRE(run("sweep --param kid --values 0,0.1,0.2 --t-end 20 --nx0 8 --nx1 8 --out " + out.string()) == 0);
    const std::string summary = slurp(out / "sweep_summary.csv");
    CHECK(lines(summary) == 4);
    CHECK(summary.find("kid,0.10000000000000001,ok,") != std::string::npos);
    CHECK(run("sweep --param nope --values 1 --out " + out.string()) == 1);
    CHECK(run("simulate --param kid --values 1 --out " + out.string()) == 1);
}

TEST_CASE("exit codes") {
    Scratch s;
    write(s.dir / "porous.json", R"({"matrix": {"eps0": 1.5}})");
    write(s.dir / "typo.json", R"({"matrix": {"kmm": 1}})");
    write(s.dir / "broken.json", "{ \"matrix\": ");
    CHECK(run("simulate --config " + (s.dir / "porous.json").string() + " --out " + s.dir.string()) == 1);
    CHECK(fs::exists(s.dir / "error.json"));
    CHECK(twolayer::Json::parse(slurp(s.dir / "error.json")).at("error") == "validation");
    CHECK(run("simulate --config " + (s.dir / "typo.json").string() + " --out " + s.dir.string()) == 1);
    CHECK(run("simulate --config " + (s.dir / "broken.json").string() + " --out " + s.dir.string()) == 1);
    CHECK(run("simulate --dt -1 --out " + s.dir.string()) == 1);
    CHECK(run("simulate --outer-bc open --out " + s.dir.string()) == 1);
    CHECK(run("simulate --config " + (s.dir / "missing.json").string()) == 3);
    write(s.dir / "file", "x");
    CHECK(run("simulate --t-end 0 --out " + (s.dir / "file" / "sub").string()) == 3);
    CHECK(run("") == 1);
}
