#include "tlns/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tlns;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text)
{
    std::istringstream is(text);
    return parse_config(is);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("tlns_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST(Config, Defaults)
{
    const auto c = parse("# only a comment\n\n");
    EXPECT_EQ(c.mode, Mode::Galerkin);
    EXPECT_DOUBLE_EQ(c.nu, 1.0);
    EXPECT_EQ(c.element, ElementKind::Mini);
    EXPECT_EQ(c.n_coarse, 4);
    EXPECT_FALSE(c.dt.has_value());
    EXPECT_DOUBLE_EQ(c.time_step(0.25), 1.0 / 64.0);
    EXPECT_DOUBLE_EQ(c.time_step(1.0 / 32.0), 1.0 / 4096.0);
}

TEST(Config, ValuesFractionsAndAlias)
{
    const auto c = parse("mode = two_level\nviscosity = 0.5\nelement = TAYLOR_HOOD\nfine_levels = 2\n"
                         "dt = 1/64\nsample_times = 1, 0.5\ncoupling = EXPLICIT 2\n");
    EXPECT_EQ(c.mode, Mode::TwoLevel);
    EXPECT_DOUBLE_EQ(c.nu, 0.5);
    EXPECT_EQ(c.element, ElementKind::TaylorHood);
    EXPECT_DOUBLE_EQ(*c.dt, 1.0 / 64.0);
    EXPECT_EQ(c.sample_times, (std::vector<double>{0.5, 1.0}));
    EXPECT_EQ(c.coupling, Coupling::Explicit);
    EXPECT_EQ(c.coupling_level, 2);
}

TEST(Config, NegativeViscosityNamesKeyAndLine)
{
    try {
        parse("mode = GALERKIN\nnu = -1\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "nu");
        EXPECT_EQ(e.line(), 2);
        EXPECT_NE(std::string(e.what()).find("nu"), std::string::npos);
    }
}

TEST(Config, UnknownKeySuggestsNearest)
{
    try {
        parse("\n\nviscosityy = 1\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_NE(std::string(e.what()).find("did you mean 'viscosity'"), std::string::npos) << e.what();
    }
}

TEST(Config, SyntaxErrors)
{
    EXPECT_THROW(parse("nu 1\n"), ConfigError);
    EXPECT_THROW(parse("nu = \n"), ConfigError);
    EXPECT_THROW(parse("nu = 1\nviscosity = 2\n"), ConfigError);
    EXPECT_THROW(parse("element = P2P1\n"), ConfigError);
    EXPECT_THROW(parse("n_coarse = 2.5\n"), ConfigError);
    EXPECT_THROW(parse("coupling = EXPLICIT\n"), ConfigError);
    EXPECT_THROW(parse("deterministic = maybe\n"), ConfigError);
}

TEST(Config, ModeSpecificValidation)
{
    EXPECT_THROW(parse("mode = COMPARISON\nfine_levels = 0\n"), ConfigError);
    EXPECT_THROW(parse("mode = SINGULARITY_STUDY\nfine_levels = 2\nsample_times = 0, 1\n"), ConfigError);
    EXPECT_THROW(parse("mode = GALERKIN\nt_final = 1\nsample_times = 2\n"), ConfigError);
    EXPECT_THROW(parse("fine_levels = 1\ncoupling = EXPLICIT 2\n"), ConfigError);
}

TEST(Config, EchoRoundTrips)
{
    const auto c = parse("mode = CONVERGENCE_STUDY\nnu = 0.1\nfine_levels = 2\nt_final = 0.5\ndt = 0.01\n"
                         "sample_times = 0.25, 0.5\nfixture = NONSMOOTH\nnonsmooth_modes = 16\n");
    const auto again = parse(c.echo());
    EXPECT_EQ(again.echo(), c.echo());
}

TEST(Config, FileNotFound)
{
    EXPECT_THROW(parse_config_file("/nonexistent/tlns.cfg"), ConfigError);
}

TEST(Experiment, GalerkinZeroFinalTimeReportsProjection)
{
    auto c = parse("t_final = 0\nn_coarse = 4\n");
    c.output_dir = scratch("galerkin0");
    c.deterministic = true;
    const auto out = run_experiment(c);
    EXPECT_EQ(out.exit_code, kExitPass);
    const std::string report = slurp(c.output_dir / "report.txt");
    EXPECT_NE(report.find("initial projection"), std::string::npos);
    EXPECT_NE(report.find("[result]\nPASS"), std::string::npos);
    const std::string csv = slurp(c.output_dir / "errors.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Experiment, ComparisonWritesFileContract)
{
    auto c = parse("mode = COMPARISON\nn_coarse = 2\nfine_levels = 1\nt_final = 0.1\ndt = 0.05\ndump_fields = true\n");
    c.output_dir = scratch("comparison");
    const auto out = run_experiment(c);
    for (const char* f : {"report.txt", "errors.csv", "one_level.csv", "two_level.csv"})
        EXPECT_TRUE(fs::exists(c.output_dir / f)) << f;
    EXPECT_TRUE(fs::exists(c.output_dir / "fields" / "two_level_0.txt"));
    bool found = false;
    for (const auto& chk : out.checks)
        if (chk.name == "fine-phase nonlinear iterations") {
            found = true;
            EXPECT_TRUE(chk.passed);
        }
    EXPECT_TRUE(found);
    const std::string field = slurp(c.output_dir / "fields" / "two_level_0.txt");
    std::istringstream is(field);
    std::string tag;
    double t = 0.0;
    int count = 0;
    is >> tag >> t >> count;
    EXPECT_EQ(tag, "field");
    EXPECT_DOUBLE_EQ(t, 0.1);
    EXPECT_GT(count, 0);
    EXPECT_NE(field.find("\npressure "), std::string::npos);
}

TEST(Experiment, DeterministicRunsAreByteIdentical)
{
    auto c = parse("mode = TWO_LEVEL\nn_coarse = 2\nfine_levels = 1\nt_final = 0.1\ndt = 0.025\n"
                   "sample_times = 0.05, 0.1\ndeterministic = true\n");
    c.output_dir = scratch("det_a");
    run_experiment(c);
    const std::string a_csv = slurp(c.output_dir / "errors.csv");
    const std::string a_rep = slurp(c.output_dir / "report.txt");
    c.output_dir = scratch("det_b");
    run_experiment(c);
    EXPECT_EQ(slurp(c.output_dir / "errors.csv"), a_csv);
    // The reports differ only in the output_dir line.
    std::string b_rep = slurp(c.output_dir / "report.txt");
    const auto strip = [](std::string s) {
        const auto p = s.find("output_dir = ");
        s.erase(p, s.find('\n', p) - p);
        return s;
    };
    EXPECT_EQ(strip(b_rep), strip(a_rep));
    EXPECT_EQ(a_rep.find("wall time"), std::string::npos);
}

TEST(Experiment, ConvergenceStudyReportsEoc)
{
    auto c = parse("mode = CONVERGENCE_STUDY\nn_coarse = 2\nfine_levels = 2\nt_final = 0.05\ndt = 0.0125\n"
                   "deterministic = true\n");
    c.output_dir = scratch("conv");
    c.jobs = 2;
    const auto out = run_experiment(c);
    EXPECT_NE(out.exit_code, kExitSolverFailure);
    // Two consecutive EOCs, three quantities each, plus one divergence check per level.
    EXPECT_EQ(out.checks.size(), 2u * 3u + 3u);
    EXPECT_NE(out.report.find("EOC at t = 0.05"), std::string::npos);
}

TEST(Experiment, SingularityStudyRuns)
{
    auto c = parse("mode = SINGULARITY_STUDY\nfixture = NONSMOOTH\nn_coarse = 2\nfine_levels = 2\nt_final = 0.25\n"
                   "dt = 1/32\nsample_times = 1/16, 1/4\nnonsmooth_modes = 8\ndeterministic = true\n");
    c.output_dir = scratch("sing");
    const auto out = run_experiment(c);
    EXPECT_NE(out.exit_code, kExitSolverFailure);
    EXPECT_EQ(out.checks.size(), 4u);
    const std::string csv = slurp(c.output_dir / "errors.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 2);
}

TEST(Experiment, ShallowHierarchyIsSolverFailureExit)
{
    auto c = parse("mode = TWO_LEVEL\nn_coarse = 8\nfine_levels = 1\nt_final = 0.1\n");
    c.output_dir = scratch("shallow");
    // H = 1/8 needs h <= sqrt(2)/64; one refinement is not enough.
    const auto out = run_experiment(c);
    EXPECT_EQ(out.exit_code, kExitSolverFailure);
    EXPECT_NE(out.report.find("[failure]"), std::string::npos);
}
