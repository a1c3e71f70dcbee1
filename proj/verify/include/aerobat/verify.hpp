#pragma once

#include "aerobat/sim.hpp"

#include <string>
#include <vector>

// Property suites backing the acceptance gate and the `verify` subcommand.
namespace aerobat::verify {

struct Check {
    int criterion{0};
    std::string name;
    double measured{0};
    std::string relation;  // "<", "<=", ">=", "==", "within"
    double limit{0};
    bool passed{false};
    std::string note;
};

struct SuiteReport {
    std::string name;
    std::vector<Check> checks;
    double seconds{0};
    bool passed() const;
};

std::vector<std::string> suiteNames();

/// Runs one suite by name ("aero-oracle", "conservation", "observer", "closed-loop").
/// Throws ConfigError on an unknown name.
SuiteReport runSuite(const std::string& name);

/// Every suite in order; "all" on the command line.
std::vector<SuiteReport> runAll();

std::string formatCheck(const Check& c);
std::string formatReport(const SuiteReport& r);

// Individual properties, exposed for the test suite.
std::vector<Check> aeroOracleChecks();
std::vector<Check> kuttaJoukowskiChecks();
std::vector<Check> ellipticChecks();
std::vector<Check> conservationChecks();
std::vector<Check> freeFallChecks();
std::vector<Check> observerChecks();
std::vector<Check> cancellationChecks();
std::vector<Check> allocationChecks();
std::vector<Check> closedLoopChecks(const sim::SimConfig& cfg);

/// Configuration used by the passive conservation check.
sim::SimConfig passiveAuditConfig(double dt);

/// Configuration used by the free-fall check.
sim::SimConfig freeFallConfig();

/// Peak |xhat3 - x3| for a decoupled plant driven by G = amplitude sin(2 pi f t), zero initial error.
double peakDisturbanceError(double omega0, double amplitude, double frequency, double duration, double dt);

/// Least-squares decay rate of log|e| over [t0, t1] for the unforced observer error dynamics.
double measuredDecayRate(double omega0, double t0, double t1, double dt);

}  // namespace aerobat::verify
