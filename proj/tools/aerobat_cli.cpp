#include "aerobat/app.hpp"
#include "aerobat/config.hpp"
#include "aerobat/errors.hpp"
#include "aerobat/io.hpp"
#include "aerobat/plotdata.hpp"
#include "aerobat/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

namespace fs = std::filesystem;
using namespace aerobat;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSimulationFailure = 2;
constexpr int kCheckFailure = 3;

struct Common {
    std::string config_path;
    std::string output_dir;
    std::vector<std::string> overrides;
};

config::Json loadDocument(const Common& c) {
    config::Json doc = c.config_path.empty() ? config::toJson(sim::SimConfig{}) : config::loadFile(c.config_path);
    for (const std::string& o : c.overrides) config::applyOverride(doc, o);
    return doc;
}

std::optional<fs::path> outputFlag(const Common& c) {
    if (c.output_dir.empty()) return std::nullopt;
    return fs::path(c.output_dir);
}

int runCommand(const Common& c) {
    const config::Json doc = loadDocument(c);
    sim::SimConfig cfg = config::fromJson(doc);
    cfg.validate();
    const fs::path out = app::outputDirectory(outputFlag(c), cfg);
    const app::RunArtifacts a = app::runAndWrite(doc, out);
    std::cout << app::summaryTable(a.result);
    std::cout << "csv                          " << a.csv.string() << "\n";
    std::cout << "metadata                     " << a.metadata.string() << "\n";
    if (!a.result.ok()) {
        std::cerr << "error: simulation failed (" << a.result.failure->kind << ") at t = " << a.result.failure->time
                  << " s: " << a.result.failure->message << "\n";
        return kSimulationFailure;
    }
    return kOk;
}

int sweepCommand(const Common& c, const std::vector<std::string>& axes, int jobs) {
    const config::Json doc = loadDocument(c);
    const std::vector<app::SweepPoint> points = app::sweepGrid(doc, axes);
    for (const app::SweepPoint& p : points) {
        sim::SimConfig cfg = config::fromJson(p.doc);
        cfg.validate();
    }
    sim::SimConfig cfg = config::fromJson(doc);
    const fs::path out = app::outputDirectory(outputFlag(c), cfg);
    const std::vector<app::SweepOutcome> outcomes = app::runSweep(points, out, jobs);
    std::cout << app::sweepTable(outcomes);
    std::cout << "summary: " << (out / "sweep.csv").string() << "\n";
    int failed = 0;
    for (const app::SweepOutcome& o : outcomes) failed += o.ok() ? 0 : 1;
    if (failed) {
        std::cerr << "error: " << failed << " of " << outcomes.size() << " scenarios failed\n";
        return kSimulationFailure;
    }
    return kOk;
}

int verifyCommand(const std::string& suite) {
    std::vector<verify::SuiteReport> reports;
    if (suite == "all")
        reports = verify::runAll();
    else
        reports.push_back(verify::runSuite(suite));
    bool ok = true;
    for (const verify::SuiteReport& r : reports) {
        std::cout << verify::formatReport(r);
        ok = ok && r.passed();
    }
    std::cout << (ok ? "all checks passed\n" : "some checks failed\n");
    return ok ? kOk : kCheckFailure;
}

int plotdataCommand(const std::string& log_path, const std::string& figure_name, const std::string& output) {
    const plot::Figure fig = plot::figureFromString(figure_name);
    const sim::TrajectoryLog log = io::readCsv(log_path);
    const std::string text = plot::formatLong(plot::figure(log, fig));
    if (output.empty())
        std::cout << text;
    else
        io::writeFileAtomic(output, text);
    return kOk;
}

void addCommon(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config_path, "JSON configuration file (defaults when omitted)");
    cmd->add_option("-o,--output", c.output_dir,
                    std::string("output directory (default: $") + app::kOutputDirEnv + ", then output.dir)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Guard-suspended flapping-wing robot simulator"};
    cli.require_subcommand(1);

    Common run_opts;
    CLI::App* run = cli.add_subcommand("run", "run one scenario and write its CSV log and metadata");
    addCommon(run, run_opts);
    run->add_option("-s,--set", run_opts.overrides, "override a configuration key, e.g. observer.omega0=20");

    Common sweep_opts;
    std::vector<std::string> axes;
    int jobs = 1;
    CLI::App* sweep = cli.add_subcommand("sweep", "run the cartesian product of parameter values");
    addCommon(sweep, sweep_opts);
    sweep->add_option("-s,--set", axes, "sweep axis key=v1,v2,... (a single value fixes the key)")->required();
    sweep->add_option("-j,--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    std::string suite = "all";
    CLI::App* ver = cli.add_subcommand("verify", "run property suites and report measured values");
    ver->add_option("suite", suite, "aero-oracle | conservation | observer | closed-loop | all");

    std::string log_path, figure_name, plot_output;
    CLI::App* plot = cli.add_subcommand("plotdata", "emit long-format (t, series, value) data for a figure");
    plot->add_option("log", log_path, "trajectory CSV written by run")->required();
    plot->add_option("figure", figure_name, "gen-forces | tracking")->required();
    plot->add_option("-o,--output", plot_output, "write to a file instead of standard output");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        cli.exit(e);
        return kConfigError;
    }

    try {
        if (*run) return runCommand(run_opts);
        if (*sweep) return sweepCommand(sweep_opts, axes, jobs);
        if (*ver) return verifyCommand(suite);
        if (*plot) return plotdataCommand(log_path, figure_name, plot_output);
    } catch (const aerobat::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSimulationFailure;
    }
    return kConfigError;
}
