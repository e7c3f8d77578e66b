// Command-line front end for the experiment runner.
//
//   tlns run       --config FILE [--output DIR] [--jobs N] [--deterministic] [--seed N] [--set key=value ...]
//   tlns study     ... (CONVERGENCE_STUDY or SINGULARITY_STUDY configs)
//   tlns compare   ... (forces mode = COMPARISON)
//   tlns dump-mesh [--config FILE] [--output DIR] [--set key=value ...]
//
// Exit status: 0 all checks passed, 1 a rate check failed, 2 solver failure,
// 3 bad command line or configuration.

#include "tlns/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kExitUsage = 3;

struct Options
{
    std::string config_path;
    std::string output;
    int jobs = 1;
    bool deterministic = false;
    long seed = -1;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Options& o, bool config_required)
{
    auto* cfg = cmd->add_option("--config", o.config_path, "key = value configuration file");
    if (config_required)
        cfg->required()->check(CLI::ExistingFile);
    else
        cfg->check(CLI::ExistingFile);
    cmd->add_option("--output", o.output, "output directory (overrides output_dir)");
    cmd->add_option("--jobs", o.jobs, "concurrent study cells")->check(CLI::PositiveNumber);
    cmd->add_flag("--deterministic", o.deterministic, "omit wall-clock data so outputs are reproducible");
    cmd->add_option("--seed", o.seed, "seed recorded in the report")->check(CLI::NonNegativeNumber);
    cmd->add_option("--set", o.overrides, "extra key=value setting, applied after the file");
}

tlns::ExperimentConfig load(const Options& o)
{
    tlns::ExperimentConfig c;
    if (!o.config_path.empty())
        c = tlns::parse_config_file(o.config_path);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw tlns::ConfigError(kv, 0, "--set expects key=value");
        std::string key = kv.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        tlns::apply_config_value(c, key, kv.substr(eq + 1));
    }
    if (!o.output.empty())
        c.output_dir = o.output;
    if (o.deterministic)
        c.deterministic = true;
    if (o.seed >= 0)
        c.seed = static_cast<unsigned>(o.seed);
    c.jobs = o.jobs;
    c.validate();
    return c;
}

int execute(const tlns::ExperimentConfig& c)
{
    const auto outcome = tlns::run_experiment(c);
    std::cout << outcome.report;
    for (const auto& f : outcome.files)
        std::cerr << "wrote " << f.string() << '\n';
    return outcome.exit_code;
}

int dump_mesh(const tlns::ExperimentConfig& c)
{
    std::filesystem::create_directories(c.output_dir);
    const auto hierarchy = tlns::build_hierarchy(c.n_coarse, c.fine_levels);
    for (int k = 0; k < hierarchy.num_levels(); ++k) {
        const auto path = c.output_dir / ("mesh_level" + std::to_string(k) + ".txt");
        std::ofstream os(path);
        if (!os)
            throw tlns::Error("cannot write '" + path.string() + "'");
        tlns::write_mesh(os, *hierarchy.level(k));
        const auto report = tlns::check_conformity(*hierarchy.level(k));
        std::cout << path.string() << ": " << hierarchy.level(k)->num_vertices() << " vertices, "
                  << hierarchy.level(k)->num_triangles() << " triangles, conforming = "
                  << (report.ok() ? "yes" : "no") << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-level finite element solver for the 2D incompressible Navier-Stokes equations"};
    app.require_subcommand(1);

    Options run_opts, study_opts, compare_opts, mesh_opts;
    auto* run = app.add_subcommand("run", "run the mode given in the configuration");
    add_common(run, run_opts, true);
    auto* study = app.add_subcommand("study", "run a convergence or singularity study");
    add_common(study, study_opts, true);
    auto* compare = app.add_subcommand("compare", "one-level against two-level on the same fine mesh");
    add_common(compare, compare_opts, true);
    auto* mesh = app.add_subcommand("dump-mesh", "write every level of the mesh hierarchy");
    add_common(mesh, mesh_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (run->parsed())
            return execute(load(run_opts));
        if (study->parsed()) {
            const auto c = load(study_opts);
            if (c.mode != tlns::Mode::ConvergenceStudy && c.mode != tlns::Mode::SingularityStudy)
                throw tlns::ConfigError("mode", 0, "'study' needs CONVERGENCE_STUDY or SINGULARITY_STUDY");
            return execute(c);
        }
        if (compare->parsed()) {
            compare_opts.overrides.insert(compare_opts.overrides.begin(), "mode=COMPARISON");
            return execute(load(compare_opts));
        }
        return dump_mesh(load(mesh_opts));
    } catch (const tlns::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    } catch (const tlns::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return tlns::kExitSolverFailure;
    }
}
