#pragma once

#include "tlns/error.hpp"
#include "tlns/twolevel.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tlns {

enum class Mode
{
    Galerkin,
    TwoLevel,
    ConvergenceStudy,
    SingularityStudy,
    Comparison,
};

enum class Fixture
{
    Smooth,
    Nonsmooth,
};

enum class Coupling
{
    HSquared,
    Explicit,
};

std::string to_string(Mode m);
std::string to_string(Fixture f);

/// A configuration problem, with the offending key and (for files) line number.
class ConfigError : public Error
{
public:
    ConfigError(std::string key, int line, const std::string& message);
    const std::string& key() const { return key_; }
    int line() const { return line_; } // 0 when the value did not come from a file

private:
    std::string key_;
    int line_;
};

struct ExperimentConfig
{
    Mode mode = Mode::Galerkin;
    double nu = 1.0;
    ElementKind element = ElementKind::Mini;
    int n_coarse = 4;
    int fine_levels = 0;
    Coupling coupling = Coupling::HSquared;
    int coupling_level = 1; // used with Coupling::Explicit
    double t_final = 1.0;
    std::optional<double> dt; // empty: AUTO, dt = min(h^2/4, t_final/64)
    Fixture fixture = Fixture::Smooth;
    std::vector<double> sample_times; // empty: t_final only
    std::filesystem::path output_dir = ".";
    unsigned seed = 0;
    bool deterministic = false;
    bool dump_fields = false;

    double newton_tol = 1e-10;
    int newton_max_iters = 25;
    bool picard_fallback = true;

    int nonsmooth_modes = 64;
    double nonsmooth_delta = 0.5;
    double nonsmooth_forcing = 1.0;

    int jobs = 1; // concurrent study cells; set from the command line

    void validate() const;

    /// Every key with its current value, one `key = value` per line, parseable by parse_config.
    std::string echo() const;

    SolverConfig solver() const;
    /// dt for a run whose finest grid spacing is h.
    double time_step(double h) const;
};

/// Keys accepted in configuration files.
const std::vector<std::string>& config_keys();

/// Apply one `key = value` pair. `line` is used for error messages only.
void apply_config_value(ExperimentConfig& config, const std::string& key, const std::string& value, int line = 0);

/// Parse `key = value` lines with `#` comments. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

struct RateCheck
{
    std::string name;
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool passed = false;
};

struct ExperimentOutcome
{
    int exit_code = 0; // 0 pass, 1 rate check failed, 2 solver failure
    std::vector<RateCheck> checks;
    std::vector<std::filesystem::path> files;
    std::string report;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitRateFailure = 1;
inline constexpr int kExitSolverFailure = 2;

/// Execute the configured mode and write report.txt, errors.csv and friends into output_dir.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

/// `field t N` followed by one `x y u1 u2` line per velocity node, then
/// `pressure t M` followed by one `x y p` line per pressure node.
void write_field(std::ostream& os, const FieldPair& field);

} // namespace tlns
