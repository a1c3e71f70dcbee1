#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int status;
    std::string output;  // stdout and stderr combined
};

Outcome invoke(const std::string& args) {
    const std::string command = std::string("\"") + AEROBAT_CLI_PATH + "\" " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    while (const std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("aerobat_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return "\"" + path.string() + "\""; }
};

std::size_t lineCount(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
    const Outcome help = invoke("--help");
    CHECK(help.status == 0);
    for (const char* cmd : {"run", "sweep", "verify", "plotdata"}) CHECK(contains(help.output, cmd));
    CHECK(invoke("").status == 1);
    CHECK(invoke("frobnicate").status == 1);
    CHECK(invoke("sweep").status == 1);
}

TEST_CASE("run writes a log and metadata") {
    TempDir dir("run");
    const Outcome r = invoke("run -o " + dir.str() + " -s sim.duration=0.5 -s sim.metrics_window=0.5 -s observer.omega0=20");
    CHECK(r.status == 0);
    CHECK(contains(r.output, "rms"));
    CHECK(lineCount(dir.path / "trajectory.csv") == 252);
    std::ifstream meta(dir.path / "metadata.json");
    std::stringstream text;
    text << meta.rdbuf();
    CHECK(contains(text.str(), "\"omega0\": 20"));

    const Outcome plot = invoke("plotdata \"" + (dir.path / "trajectory.csv").string() + "\" tracking");
    CHECK(plot.status == 0);
    CHECK(plot.output.rfind("t,series,value\n", 0) == 0);
    const Outcome bad_figure = invoke("plotdata \"" + (dir.path / "trajectory.csv").string() + "\" bode");
    CHECK(bad_figure.status == 1);
    CHECK(contains(bad_figure.output, "gen-forces"));
}

TEST_CASE("configuration errors exit with status 1") {
    TempDir dir("config");
    const Outcome missing = invoke("run -c " + (dir.path / "nope.json").string() + " -o " + dir.str());
    CHECK(missing.status == 1);
    CHECK(contains(missing.output, "nope.json"));

    const Outcome unknown = invoke("run -o " + dir.str() + " -s observer.omega=3");
    CHECK(unknown.status == 1);
    CHECK(contains(unknown.output, "observer.omega0"));

    CHECK(invoke("run -o " + dir.str() + " -s observer.omega0=fast").status == 1);
    CHECK(invoke("verify nonsense").status == 1);
    CHECK(invoke("sweep -o " + dir.str() + " -s sim.seed=1 -j 0").status == 1);
}

TEST_CASE("simulation failures exit with status 2") {
    TempDir dir("fail");
    const Outcome r = invoke("run -o " + dir.str() + " -s sim.duration=0.5 -s sim.metrics_window=0.5 -s observer.divergence_ceiling=1e-6");
    CHECK(r.status == 2);
    CHECK(contains(r.output, "observer-divergence"));
    CHECK(fs::exists(dir.path / "trajectory.csv"));
}

TEST_CASE("sweep honours the output directory variable") {
    TempDir dir("sweep");
    const std::string env = "AEROBAT_OUTPUT_DIR=" + dir.str() + " ";
    const std::string command = env + "\"" + AEROBAT_CLI_PATH +
                                "\" sweep -s sim.duration=0.2 -s sim.metrics_window=0.2 -s observer.omega0=10,20 "
                                "-s sim.seed=1,2 -j 2 > /dev/null 2>&1";
    CHECK(std::system(command.c_str()) == 0);
    for (const char* label : {"run_000", "run_001", "run_002", "run_003"})
        CHECK(fs::exists(dir.path / label / "trajectory.csv"));
    CHECK(lineCount(dir.path / "sweep.csv") == 5);
}

TEST_CASE("verify reports suites and failing checks") {
    const Outcome r = invoke("verify aero-oracle");
    CHECK(r.status == 0);
    CHECK(contains(r.output, "all checks passed"));

    const Outcome c = invoke("verify conservation");
    CHECK(c.status == 3);
    CHECK(contains(c.output, "[FAIL] (4)"));
    CHECK(contains(c.output, "some checks failed"));
}

}
