#ifndef OBLIQUE_SCENARIO_HPP
#define OBLIQUE_SCENARIO_HPP

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oblique/basis.hpp"
#include "oblique/parallel.hpp"
#include "oblique/propagators.hpp"
#include "oblique/types.hpp"

namespace oblique {

// ===========================================================================
// Scenario-driven front end: JSON configs describing verification suites,
// trajectories, dt-convergence sweeps, curvature quadratures and force
// checks; CSV/JSON emission with bit-reproducible formatting.
// ===========================================================================

struct FitResult {
    double order = 0.0;      // log-log least-squares slope
    double r_squared = 0.0;  // goodness of the fit
};

/// Least-squares fit of log(y) against log(x).
FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Deserialize a scalar law / family spec from config JSON (see configs/ for
/// the documented dialect). Throws ConfigParseError naming the offending
/// field.
ScalarLaw law_from_json_text(const std::string& json_text);
std::shared_ptr<BasisFamily> family_from_json_text(const std::string& json_text);

/// Write an observable log as CSV:
///   step,time,norm_1..norm_k,energy_1..energy_k,ortho_dev,
///   berry_re_1..berry_re_P,berry_im_1..berry_im_P
/// Formatting is %.17g throughout, so identical logs give identical bytes.
void emit_csv(const ObservableLog& log, const std::string& path);

/// Write an observable log as JSON (row data plus a summary object; optional
/// convergence fit attached by dt sweeps).
void emit_json(const ObservableLog& log, const std::string& path,
               const std::optional<FitResult>& fit = std::nullopt,
               std::uint64_t seed = 0);

struct ScenarioOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunReport {
    std::vector<ScenarioOutcome> outcomes;
    bool all_passed() const;
};

/// Execute every scenario in a config file. Scenario-level errors are folded
/// into the report without aborting later scenarios; config-level parse
/// errors throw ConfigParseError. Relative output paths are resolved against
/// $OBLIQUE_OUTPUT_DIR when that variable is set.
RunReport run_config(const std::string& config_path,
                     par::Execution ex = par::Execution::serial,
                     std::ostream* diag = nullptr);

/// Identity-verification sweep used by the `verify` subcommand and the
/// verify_identities task: `points` seeded random domain points, analytic and
/// finite-difference schemes.
struct VerifySummary {
    std::string family;
    int points = 0;
    std::uint64_t seed = 0;
    double worst_analytic = 0.0;
    double worst_fd = 0.0;
    double tolerance_analytic = 1e-10;
    double tolerance_fd = 1e-6;
    bool passed = false;
};

VerifySummary verify_family_identities(const BasisFamily& family, int points,
                                       std::uint64_t seed, double tol_analytic,
                                       double tol_fd, double fd_step,
                                       par::Execution ex = par::Execution::serial);

/// Exit codes for the CLI: 0 all gates passed, 1 gate failure, 2 bad config.
int cli_main(int argc, char** argv);

}  // namespace oblique

#endif
