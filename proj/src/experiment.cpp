#include "tlns/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace tlns {

namespace fs = std::filesystem;

std::string to_string(Mode m)
{
    switch (m) {
    case Mode::Galerkin: return "GALERKIN";
    case Mode::TwoLevel: return "TWO_LEVEL";
    case Mode::ConvergenceStudy: return "CONVERGENCE_STUDY";
    case Mode::SingularityStudy: return "SINGULARITY_STUDY";
    case Mode::Comparison: return "COMPARISON";
    }
    return "?";
}

std::string to_string(Fixture f) { return f == Fixture::Smooth ? "SMOOTH" : "NONSMOOTH"; }

ConfigError::ConfigError(std::string key, int line, const std::string& message)
    : Error("config: " + (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + "key '" + key
            + "': " + message)
    , key_(std::move(key))
    , line_(line)
{
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string upper(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

std::size_t edit_distance(const std::string& a, const std::string& b)
{
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double parse_double(const std::string& key, const std::string& v, int line)
{
    // A fraction such as 1/64 is accepted for times.
    const auto slash = v.find('/');
    try {
        std::size_t used = 0;
        if (slash != std::string::npos) {
            const double num = std::stod(v.substr(0, slash), &used);
            if (used != trim(v.substr(0, slash)).size())
                throw std::invalid_argument(v);
            const std::string dens = trim(v.substr(slash + 1));
            const double den = std::stod(dens, &used);
            if (used != dens.size() || den == 0.0)
                throw std::invalid_argument(v);
            return num / den;
        }
        const double x = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw ConfigError(key, line, "expected a number, got '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v, int line)
{
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size() || x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
            throw std::invalid_argument(v);
        return static_cast<int>(x);
    } catch (const std::logic_error&) {
        throw ConfigError(key, line, "expected an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v, int line)
{
    const std::string u = upper(v);
    if (u == "TRUE" || u == "1" || u == "YES" || u == "ON")
        return true;
    if (u == "FALSE" || u == "0" || u == "NO" || u == "OFF")
        return false;
    throw ConfigError(key, line, "expected true or false, got '" + v + "'");
}

// Shortest text that reads back to the same double.
std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

const std::vector<std::string> kKeys = {
    "mode",        "nu",           "viscosity",     "element",          "n_coarse",          "fine_levels",
    "coupling",    "t_final",      "dt",            "fixture",          "sample_times",      "output_dir",
    "seed",        "deterministic", "dump_fields",  "newton_tol",       "newton_max_iters",  "picard_fallback",
    "nonsmooth_modes", "nonsmooth_delta", "nonsmooth_forcing",
};

} // namespace

const std::vector<std::string>& config_keys() { return kKeys; }

void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& raw, int line)
{
    const std::string v = trim(raw);
    if (v.empty())
        throw ConfigError(key, line, "missing value");
    const std::string u = upper(v);
    if (key == "mode") {
        static const std::map<std::string, Mode> modes{{"GALERKIN", Mode::Galerkin},
                                                       {"TWO_LEVEL", Mode::TwoLevel},
                                                       {"CONVERGENCE_STUDY", Mode::ConvergenceStudy},
                                                       {"SINGULARITY_STUDY", Mode::SingularityStudy},
                                                       {"COMPARISON", Mode::Comparison}};
        const auto it = modes.find(u);
        if (it == modes.end())
            throw ConfigError(key, line,
                              "expected GALERKIN, TWO_LEVEL, CONVERGENCE_STUDY, SINGULARITY_STUDY or COMPARISON");
        c.mode = it->second;
    } else if (key == "nu" || key == "viscosity") {
        c.nu = parse_double("nu", v, line);
    } else if (key == "element") {
        if (u == "MINI")
            c.element = ElementKind::Mini;
        else if (u == "TAYLOR_HOOD")
            c.element = ElementKind::TaylorHood;
        else
            throw ConfigError(key, line, "expected MINI or TAYLOR_HOOD");
    } else if (key == "n_coarse") {
        c.n_coarse = parse_int(key, v, line);
    } else if (key == "fine_levels") {
        c.fine_levels = parse_int(key, v, line);
    } else if (key == "coupling") {
        std::istringstream is(u);
        std::string kind, level, extra;
        is >> kind >> level >> extra;
        if (kind == "H_SQUARED" && level.empty()) {
            c.coupling = Coupling::HSquared;
        } else if (kind == "EXPLICIT" && !level.empty() && extra.empty()) {
            c.coupling = Coupling::Explicit;
            c.coupling_level = parse_int(key, level, line);
        } else {
            throw ConfigError(key, line, "expected H_SQUARED or EXPLICIT <level>");
        }
    } else if (key == "t_final") {
        c.t_final = parse_double(key, v, line);
    } else if (key == "dt") {
        if (u == "AUTO")
            c.dt.reset();
        else
            c.dt = parse_double(key, v, line);
    } else if (key == "fixture") {
        if (u == "SMOOTH")
            c.fixture = Fixture::Smooth;
        else if (u == "NONSMOOTH")
            c.fixture = Fixture::Nonsmooth;
        else
            throw ConfigError(key, line, "expected SMOOTH or NONSMOOTH");
    } else if (key == "sample_times") {
        c.sample_times.clear();
        std::string list = v;
        std::replace(list.begin(), list.end(), ',', ' ');
        std::istringstream is(list);
        std::string item;
        while (is >> item)
            c.sample_times.push_back(parse_double(key, item, line));
        std::sort(c.sample_times.begin(), c.sample_times.end());
    } else if (key == "output_dir") {
        c.output_dir = v;
    } else if (key == "seed") {
        const int s = parse_int(key, v, line);
        if (s < 0)
            throw ConfigError(key, line, "must be nonnegative");
        c.seed = static_cast<unsigned>(s);
    } else if (key == "deterministic") {
        c.deterministic = parse_bool(key, v, line);
    } else if (key == "dump_fields") {
        c.dump_fields = parse_bool(key, v, line);
    } else if (key == "newton_tol") {
        c.newton_tol = parse_double(key, v, line);
    } else if (key == "newton_max_iters") {
        c.newton_max_iters = parse_int(key, v, line);
    } else if (key == "picard_fallback") {
        c.picard_fallback = parse_bool(key, v, line);
    } else if (key == "nonsmooth_modes") {
        c.nonsmooth_modes = parse_int(key, v, line);
    } else if (key == "nonsmooth_delta") {
        c.nonsmooth_delta = parse_double(key, v, line);
    } else if (key == "nonsmooth_forcing") {
        c.nonsmooth_forcing = parse_double(key, v, line);
    } else {
        std::string best;
        std::size_t best_d = 4;
        for (const auto& k : kKeys) {
            const std::size_t d = edit_distance(key, k);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        throw ConfigError(key, line, best.empty() ? "unknown key" : "unknown key; did you mean '" + best + "'?");
    }
}

void ExperimentConfig::validate() const
{
    auto require = [](bool ok, const char* key, const std::string& what) {
        if (!ok)
            throw ConfigError(key, 0, what);
    };
    require(nu > 0.0 && std::isfinite(nu), "nu", "must be positive");
    require(n_coarse >= 1, "n_coarse", "must be at least 1");
    require(fine_levels >= 0 && fine_levels <= 8, "fine_levels", "must lie in 0..8");
    require(t_final >= 0.0 && std::isfinite(t_final), "t_final", "must be nonnegative");
    require(!dt || (*dt > 0.0 && std::isfinite(*dt)), "dt", "must be positive or AUTO");
    for (double t : sample_times)
        require(t >= 0.0 && t <= t_final * (1.0 + 1e-12), "sample_times", "every time must lie in [0, t_final]");
    require(newton_tol > 0.0, "newton_tol", "must be positive");
    require(newton_max_iters >= 1, "newton_max_iters", "must be at least 1");
    require(nonsmooth_modes >= 1, "nonsmooth_modes", "must be at least 1");
    require(nonsmooth_delta > 0.0 && nonsmooth_delta < 1.0, "nonsmooth_delta", "must lie in (0, 1)");
    require(nonsmooth_forcing >= 0.0, "nonsmooth_forcing", "must be nonnegative");
    require(jobs >= 1, "jobs", "must be at least 1");
    if (coupling == Coupling::Explicit)
        require(coupling_level >= 1 && coupling_level <= fine_levels, "coupling",
                "explicit level must lie in 1..fine_levels");
    const bool two_level = mode == Mode::TwoLevel || mode == Mode::Comparison;
    if (two_level)
        require(fine_levels >= 1, "fine_levels", "two-level modes need at least one fine level");
    if (mode == Mode::ConvergenceStudy || mode == Mode::SingularityStudy)
        require(fine_levels >= 1, "fine_levels", "studies need at least two levels");
    if (mode == Mode::SingularityStudy) {
        require(t_final > 0.0, "t_final", "singularity study needs t_final > 0");
        for (double t : sample_times)
            require(t > 0.0, "sample_times", "weighted traces need positive sample times");
    }
    if (mode == Mode::ConvergenceStudy && fixture == Fixture::Nonsmooth)
        require(fine_levels >= 2, "fine_levels", "self-convergence needs at least three levels");
}

std::string ExperimentConfig::echo() const
{
    std::ostringstream os;
    os << "mode = " << to_string(mode) << '\n';
    os << "nu = " << format_double(nu) << '\n';
    os << "element = " << to_string(element) << '\n';
    os << "n_coarse = " << n_coarse << '\n';
    os << "fine_levels = " << fine_levels << '\n';
    os << "coupling = " << (coupling == Coupling::HSquared ? std::string("H_SQUARED")
                                                             : "EXPLICIT " + std::to_string(coupling_level))
       << '\n';
    os << "t_final = " << format_double(t_final) << '\n';
    os << "dt = " << (dt ? format_double(*dt) : std::string("AUTO")) << '\n';
    os << "fixture = " << to_string(fixture) << '\n';
    os << "sample_times =";
    for (std::size_t i = 0; i < sample_times.size(); ++i)
        os << (i ? ", " : " ") << format_double(sample_times[i]);
    if (sample_times.empty())
        os << ' ' << format_double(t_final);
    os << '\n';
    os << "output_dir = " << output_dir.string() << '\n';
    os << "seed = " << seed << '\n';
    os << "deterministic = " << (deterministic ? "true" : "false") << '\n';
    os << "dump_fields = " << (dump_fields ? "true" : "false") << '\n';
    os << "newton_tol = " << format_double(newton_tol) << '\n';
    os << "newton_max_iters = " << newton_max_iters << '\n';
    os << "picard_fallback = " << (picard_fallback ? "true" : "false") << '\n';
    os << "nonsmooth_modes = " << nonsmooth_modes << '\n';
    os << "nonsmooth_delta = " << format_double(nonsmooth_delta) << '\n';
    os << "nonsmooth_forcing = " << format_double(nonsmooth_forcing) << '\n';
    return os.str();
}

SolverConfig ExperimentConfig::solver() const
{
    SolverConfig s;
    s.nu = nu;
    s.newton_tol = newton_tol;
    s.newton_max_iters = newton_max_iters;
    s.picard_fallback = picard_fallback;
    return s;
}

double ExperimentConfig::time_step(double h) const
{
    if (dt)
        return *dt;
    const double by_mesh = h * h / 4.0;
    return t_final > 0.0 ? std::min(by_mesh, t_final / 64.0) : by_mesh;
}

ExperimentConfig parse_config(std::istream& in)
{
    ExperimentConfig c;
    std::map<std::string, int> lines;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        const auto hash = text.find('#');
        if (hash != std::string::npos)
            text.erase(hash);
        text = trim(text);
        if (text.empty())
            continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError(text, line, "expected 'key = value'");
        const std::string key = trim(text.substr(0, eq));
        if (key.empty())
            throw ConfigError(key, line, "empty key");
        const std::string canonical = key == "viscosity" ? "nu" : key;
        if (lines.count(canonical))
            throw ConfigError(key, line, "duplicate key (first set on line " + std::to_string(lines[canonical]) + ")");
        apply_config_value(c, key, text.substr(eq + 1), line);
        lines[canonical] = line;
    }
    try {
        c.validate();
    } catch (const ConfigError& e) {
        const auto it = lines.find(e.key());
        if (it == lines.end())
            throw;
        // Rebuild the message with the line where the key was set.
        const std::string what = e.what();
        const std::string marker = "': ";
        throw ConfigError(e.key(), it->second, what.substr(what.find(marker) + marker.size()));
    }
    return c;
}

ExperimentConfig parse_config_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", 0, "cannot open '" + path.string() + "'");
    return parse_config(in);
}

void write_field(std::ostream& os, const FieldPair& field)
{
    const auto& sp = *field.space;
    const auto old = os.precision(17);
    const int ns = sp.scalar_dofs();
    os << "field " << field.time << ' ' << ns << '\n';
    for (int s = 0; s < ns; ++s) {
        const Point& p = sp.velocity_nodes()[static_cast<std::size_t>(s)];
        os << p.x << ' ' << p.y << ' ' << field.velocity[s] << ' ' << field.velocity[ns + s] << '\n';
    }
    const auto& verts = sp.mesh()->vertices();
    os << "pressure " << field.time << ' ' << sp.pressure_dofs() << '\n';
    for (int i = 0; i < sp.pressure_dofs(); ++i)
        os << verts[static_cast<std::size_t>(i)].x << ' ' << verts[static_cast<std::size_t>(i)].y << ' '
           << field.pressure[i] << '\n';
    os.precision(old);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ExactSolution make_fixture(const ExperimentConfig& c)
{
    if (c.fixture == Fixture::Smooth)
        return make_smooth_solution(c.nu);
    NonsmoothParams p;
    p.modes = c.nonsmooth_modes;
    p.delta = c.nonsmooth_delta;
    p.forcing_amplitude = c.nonsmooth_forcing;
    return make_nonsmooth_initial_solution(c.nu, p);
}

/// Run body(i) for i in [0, count) on up to `jobs` threads; rethrows the first failure.
template <class Body>
void parallel_for(int count, int jobs, Body&& body)
{
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, std::min(jobs, count));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

RateCheck band(std::string name, double value, double lower, double upper)
{
    return {std::move(name), value, lower, upper, value >= lower && value <= upper};
}

struct Writer
{
    const ExperimentConfig& config;
    ExperimentOutcome& outcome;

    fs::path write(const std::string& name, const std::string& content)
    {
        const fs::path p = config.output_dir / name;
        std::ofstream os(p, std::ios::binary);
        if (!os)
            throw Error("cannot write '" + p.string() + "'");
        os << content;
        outcome.files.push_back(p);
        return p;
    }

    void csv(const std::string& name, const ErrorReport& report)
    {
        std::ostringstream os;
        write_csv(os, report);
        write(name, os.str());
    }

    void fields(const std::string& label, const std::vector<FieldPair>& samples)
    {
        if (!config.dump_fields)
            return;
        fs::create_directories(config.output_dir / "fields");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            std::ostringstream os;
            write_field(os, samples[i]);
            write("fields/" + label + "_" + std::to_string(i) + ".txt", os.str());
        }
    }
};

void print_errors(std::ostream& os, const ErrorReport& report)
{
    os << std::setw(12) << "t" << std::setw(12) << "h" << std::setw(12) << "H" << std::setw(14) << "|u|L2"
       << std::setw(14) << "|u|H1" << std::setw(14) << "|p|L2" << std::setw(14) << "w|u|L2" << std::setw(14)
       << "w|u|H1" << std::setw(14) << "w|p|L2" << '\n';
    for (const auto& r : report.rows) {
        os << std::setprecision(6) << std::setw(12) << r.t << std::setw(12) << r.h << std::setw(12) << r.H
           << std::scientific << std::setw(14) << r.error.velocity_l2 << std::setw(14) << r.error.velocity_h1
           << std::setw(14) << r.error.pressure_l2 << std::setw(14) << r.weighted.velocity_l2 << std::setw(14)
           << r.weighted.velocity_h1 << std::setw(14) << r.weighted.pressure_l2 << std::defaultfloat << '\n';
    }
}

void print_eoc(std::ostream& os, const ErrorReport::EocTable& table, double t)
{
    os << "EOC at t = " << t << '\n';
    os << std::setw(12) << "h" << std::setw(10) << "u L2" << std::setw(10) << "u H1" << std::setw(10) << "p L2" << '\n';
    for (std::size_t i = 0; i < table.velocity_l2.size(); ++i) {
        os << std::setprecision(6) << std::setw(12) << table.h[i + 1] << std::fixed << std::setprecision(3)
           << std::setw(10) << table.velocity_l2[i] << std::setw(10) << table.velocity_h1[i] << std::setw(10)
           << table.pressure_l2[i] << std::defaultfloat << '\n';
    }
}

std::vector<double> sample_times_of(const ExperimentConfig& c)
{
    return c.sample_times.empty() ? std::vector<double>{c.t_final} : c.sample_times;
}

TwoLevelConfig two_level_config(const ExperimentConfig& c, const MeshHierarchy& hierarchy)
{
    TwoLevelConfig tl;
    tl.fine_level_rule = c.coupling == Coupling::HSquared ? FineLevelRule::HSquared : FineLevelRule::Explicit;
    tl.explicit_level = c.coupling_level;
    tl.element = c.element;
    tl.solver = c.solver();
    tl.sample_times = sample_times_of(c);
    const int level = resolve_fine_level(hierarchy, tl);
    tl.time_grid = TimeGrid::make(c.t_final, c.time_step(hierarchy.level(level)->grid_spacing()));
    return tl;
}

void describe_grid(std::ostream& os, const TimeGrid& g)
{
    os << "dt = " << g.dt << ", steps = " << g.steps << (g.dt_adjusted ? " (dt shrunk to divide t_final)" : "")
       << '\n';
}

void describe_trajectory(std::ostream& os, const std::string& label, const Trajectory& t)
{
    os << label << ": max |B u|_inf = " << t.max_divergence << ", max saddle residual = " << t.max_residual
       << ", nonlinear iterations = " << t.nonlinear_iterations << ", Picard fallbacks = " << t.picard_fallbacks
       << '\n';
}

struct Context
{
    const ExperimentConfig& config;
    ExperimentOutcome& outcome;
    std::ostringstream& log;
    Writer writer;
    ExactSolution exact;
};

void run_galerkin(Context& ctx)
{
    const auto& c = ctx.config;
    const auto hierarchy = build_hierarchy(c.n_coarse, c.fine_levels);
    const auto mesh = hierarchy.finest();
    const double h = mesh->grid_spacing();
    const TimeGrid grid = TimeGrid::make(c.t_final, c.time_step(h));
    const DiscreteSystem system = assemble_bilinear(build_space(mesh, c.element));
    ctx.log << "mesh: n = " << std::lround(1.0 / h) << ", h = " << h << ", velocity dofs = "
            << system.space->velocity_dofs() << ", pressure dofs = " << system.space->pressure_dofs() << '\n';
    describe_grid(ctx.log, grid);
    const auto times = sample_times_of(c);
    const Trajectory traj = run_one_level(ctx.exact.initial_velocity, ctx.exact.forcing, system, grid, c.solver(), times);
    describe_trajectory(ctx.log, "galerkin", traj);

    ErrorReport report;
    if (ctx.exact.regularity == Regularity::Smooth) {
        const auto idx = sample_indices(grid, times);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double t = grid.time(idx[i]);
            report.add(t, h, h, compute_errors(traj.samples[i], ctx.exact, t));
        }
        if (grid.steps == 0)
            ctx.log << "t_final = 0: errors are those of the initial projection\n";
        print_errors(ctx.log, report);
    } else {
        ctx.log << "no closed-form solution for this fixture; errors.csv has no rows\n";
    }
    ctx.writer.csv("errors.csv", report);
    ctx.writer.fields("galerkin", traj.samples);
}

void run_two_level_mode(Context& ctx)
{
    const auto& c = ctx.config;
    const auto hierarchy = build_hierarchy(c.n_coarse, c.fine_levels);
    const TwoLevelConfig tl = two_level_config(c, hierarchy);
    const TwoLevelResult r = run_two_level(ctx.exact.initial_velocity, ctx.exact.forcing, hierarchy, tl);
    ctx.log << "coarse H = " << r.actual_H << ", fine level " << r.fine_level << " with h = " << r.actual_h
            << " (H^2 = " << r.actual_H * r.actual_H << ")\n";
    describe_grid(ctx.log, tl.time_grid);
    describe_trajectory(ctx.log, "coarse", r.coarse);
    describe_trajectory(ctx.log, "fine", r.fine);
    ctx.log << "max prolongation defect at samples = " << r.max_prolongation_defect << '\n';
    if (!c.deterministic)
        ctx.log << "timings: coarse " << r.timings.coarse_solve << " s, prolongation " << r.timings.prolongation
                << " s, fine " << r.timings.fine_solve << " s\n";

    ErrorReport report;
    if (ctx.exact.regularity == Regularity::Smooth) {
        const auto idx = sample_indices(tl.time_grid, tl.sample_times);
        ErrorReport coarse;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double t = tl.time_grid.time(idx[i]);
            report.add(t, r.actual_h, r.actual_H, compute_errors(r.fine.samples[i], ctx.exact, t));
            coarse.add(t, r.actual_H, r.actual_H, compute_errors(r.coarse.samples[i], ctx.exact, t));
        }
        ctx.log << "coarse-level errors:\n";
        print_errors(ctx.log, coarse);
        ctx.log << "two-level errors:\n";
        print_errors(ctx.log, report);
    } else {
        ctx.log << "no closed-form solution for this fixture; errors.csv has no rows\n";
    }
    ctx.writer.csv("errors.csv", report);
    ctx.writer.fields("coarse", r.coarse.samples);
    ctx.writer.fields("two_level", r.fine.samples);
}

void run_convergence_study(Context& ctx)
{
    const auto& c = ctx.config;
    const auto hierarchy = build_hierarchy(c.n_coarse, c.fine_levels);
    const int levels = hierarchy.num_levels();
    const auto times = sample_times_of(c);
    const bool smooth = ctx.exact.regularity == Regularity::Smooth;
    // Without a closed form every level shares the finest grid's dt so that
    // differences against the finest level are purely spatial.
    const double shared_dt = c.time_step(hierarchy.finest()->grid_spacing());

    std::vector<Trajectory> runs(static_cast<std::size_t>(levels));
    std::vector<TimeGrid> grids(static_cast<std::size_t>(levels));
    for (int k = 0; k < levels; ++k)
        grids[k] = TimeGrid::make(c.t_final, smooth ? c.time_step(hierarchy.level(k)->grid_spacing()) : shared_dt);
    std::vector<std::unique_ptr<DiscreteSystem>> systems(static_cast<std::size_t>(levels));
    parallel_for(levels, c.jobs, [&](int k) {
        systems[k] = std::make_unique<DiscreteSystem>(assemble_bilinear(build_space(hierarchy.level(k), c.element)));
        runs[k] = run_one_level(ctx.exact.initial_velocity, ctx.exact.forcing, *systems[k], grids[k], c.solver(), times);
    });

    ErrorReport report;
    const int last = smooth ? levels : levels - 1;
    for (int k = 0; k < levels; ++k) {
        const double h = hierarchy.level(k)->grid_spacing();
        ctx.log << "level " << k << ": n = " << std::lround(1.0 / h) << ", ";
        describe_grid(ctx.log, grids[k]);
        describe_trajectory(ctx.log, "  run", runs[k]);
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (int k = 0; k < last; ++k) {
            const double h = hierarchy.level(k)->grid_spacing();
            const double t = grids[k].time(sample_indices(grids[k], times)[i]);
            const ErrorTriple e = smooth ? compute_errors(runs[k].samples[i], ctx.exact, t)
                                         : compute_self_errors(runs[k].samples[i], runs[levels - 1].samples[i]);
            report.add(t, h, h, e);
        }
    }
    if (!smooth)
        ctx.log << "errors against the finest level (self-convergence)\n";
    print_errors(ctx.log, report);
    for (double t : times)
        print_eoc(ctx.log, report.eoc_at(t), t);

    // Rate checks at the last sample time.
    const auto table = report.eoc_at(times.back());
    const bool mini = c.element == ElementKind::Mini;
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < table.velocity_l2.size(); ++i) {
        const std::string suffix = " EOC n=" + std::to_string(std::lround(1.0 / table.h[i])) + "->"
            + std::to_string(std::lround(1.0 / table.h[i + 1]));
        ctx.outcome.checks.push_back(band("velocity L2" + suffix, table.velocity_l2[i], 1.8, mini ? 2.3 : inf));
        ctx.outcome.checks.push_back(band("velocity H1" + suffix, table.velocity_h1[i], 0.9, mini ? 1.3 : inf));
        ctx.outcome.checks.push_back(band("pressure L2" + suffix, table.pressure_l2[i], 0.9, mini ? 1.3 : inf));
    }
    for (int k = 0; k < levels; ++k)
        ctx.outcome.checks.push_back(
            band("max |B u|_inf level " + std::to_string(k), runs[k].max_divergence, 0.0, 1e-9));
    ctx.writer.csv("errors.csv", report);
    for (int k = 0; k < levels; ++k)
        ctx.writer.fields("level" + std::to_string(k), runs[k].samples);
}

void run_singularity_study(Context& ctx)
{
    const auto& c = ctx.config;
    const auto hierarchy = build_hierarchy(c.n_coarse, c.fine_levels);
    const int levels = hierarchy.num_levels();
    const auto times = sample_times_of(c);
    const TimeGrid grid = TimeGrid::make(c.t_final, c.time_step(hierarchy.finest()->grid_spacing()));
    describe_grid(ctx.log, grid);
    if (ctx.exact.regularity == Regularity::H1Only)
        ctx.log << "fixture: " << ctx.exact.description << '\n'
                << "H2 seminorm of u0 (series): " << nonsmooth_initial_h2_seminorm(
                       {c.nonsmooth_modes, c.nonsmooth_delta, c.nonsmooth_forcing})
                << '\n';

    std::vector<Trajectory> runs(static_cast<std::size_t>(levels));
    std::vector<std::unique_ptr<DiscreteSystem>> systems(static_cast<std::size_t>(levels));
    parallel_for(levels, c.jobs, [&](int k) {
        systems[k] = std::make_unique<DiscreteSystem>(assemble_bilinear(build_space(hierarchy.level(k), c.element)));
        runs[k] = run_one_level(ctx.exact.initial_velocity, ctx.exact.forcing, *systems[k], grid, c.solver(), times);
    });
    for (int k = 0; k < levels; ++k)
        describe_trajectory(ctx.log, "level " + std::to_string(k), runs[k]);

    ErrorReport report;
    const auto idx = sample_indices(grid, times);
    for (int k = 0; k + 1 < levels; ++k) {
        const double h = hierarchy.level(k)->grid_spacing();
        for (std::size_t i = 0; i < idx.size(); ++i)
            report.add(grid.time(idx[i]), h, h, compute_self_errors(runs[k].samples[i], runs[levels - 1].samples[i]));
    }
    ctx.log << "errors against the finest level (n = " << std::lround(1.0 / hierarchy.finest()->grid_spacing())
            << "), weights tau*(t)^" << report.powers.velocity_l2 << '\n';
    print_errors(ctx.log, report);

    // Per level: the weighted L2 trace may not rise by more than a factor 2
    // from one sample time to the next smaller one, and the unweighted error
    // at the smallest time must exceed the one at the largest time.
    for (int k = 0; k + 1 < levels; ++k) {
        std::vector<double> e;
        std::vector<double> tt;
        for (const auto& row : report.rows)
            if (row.h == hierarchy.level(k)->grid_spacing()) {
                e.push_back(row.error.velocity_l2);
                tt.push_back(row.t);
            }
        const auto w = weighted_error_trace(tt, e, report.powers.velocity_l2);
        double worst = 0.0;
        for (std::size_t i = 0; i + 1 < w.size(); ++i)
            worst = std::max(worst, w[i] / w[i + 1]);
        const std::string n = "n=" + std::to_string(std::lround(1.0 / hierarchy.level(k)->grid_spacing()));
        ctx.outcome.checks.push_back(band("weighted L2 trace rise toward t->0, " + n, worst, 0.0, 2.0));
        ctx.outcome.checks.push_back(
            band("unweighted L2 growth e(t_min)/e(t_max), " + n, e.front() / e.back(), 1.0 + 1e-12,
                 std::numeric_limits<double>::infinity()));
    }
    ctx.writer.csv("errors.csv", report);
    for (int k = 0; k < levels; ++k)
        ctx.writer.fields("level" + std::to_string(k), runs[k].samples);
}

void run_comparison_mode(Context& ctx)
{
    const auto& c = ctx.config;
    const auto hierarchy = build_hierarchy(c.n_coarse, c.fine_levels);
    const TwoLevelConfig tl = two_level_config(c, hierarchy);
    const bool smooth = ctx.exact.regularity == Regularity::Smooth;
    ErrorEvaluator eval;
    if (smooth)
        eval = [&](const FieldPair& f, double t) { return compute_errors(f, ctx.exact, t); };
    const ComparisonResult r = run_comparison(ctx.exact.initial_velocity, ctx.exact.forcing, hierarchy, tl, eval);

    ctx.log << "coarse H = " << r.two_level.actual_H << ", fine h = " << r.two_level.actual_h << '\n';
    describe_grid(ctx.log, tl.time_grid);
    describe_trajectory(ctx.log, "one-level", r.one_level);
    describe_trajectory(ctx.log, "two-level coarse", r.two_level.coarse);
    describe_trajectory(ctx.log, "two-level fine", r.two_level.fine);
    if (!c.deterministic) {
        ctx.log << "wall time        one-level " << r.one_level_seconds << " s, two-level " << r.two_level_seconds
                << " s, ratio two/one = " << r.time_ratio() << '\n';
        ctx.log << "two-level split  coarse " << r.two_level.timings.coarse_solve << " s, prolongation "
                << r.two_level.timings.prolongation << " s, fine " << r.two_level.timings.fine_solve << " s\n";
    }
    ErrorReport one = r.one_level_errors.value_or(ErrorReport{});
    ErrorReport two = r.two_level_errors.value_or(ErrorReport{});
    if (smooth) {
        ctx.log << "one-level errors:\n";
        print_errors(ctx.log, one);
        ctx.log << "two-level errors:\n";
        print_errors(ctx.log, two);
        ctx.log << "error ratios two/one:\n";
        for (std::size_t i = 0; i < one.rows.size(); ++i)
            ctx.log << "  t = " << one.rows[i].t << ": u H1 "
                    << two.rows[i].error.velocity_h1 / one.rows[i].error.velocity_h1 << ", p L2 "
                    << two.rows[i].error.pressure_l2 / one.rows[i].error.pressure_l2 << '\n';
    }
    if (!c.deterministic)
        ctx.outcome.checks.push_back(band("wall time ratio two-level/one-level", r.time_ratio(), 0.0, 1.0 - 1e-12));
    ctx.outcome.checks.push_back(band("fine-phase nonlinear iterations",
                                      static_cast<double>(r.two_level.fine.nonlinear_iterations), 0.0, 0.0));
    ctx.writer.csv("one_level.csv", one);
    ctx.writer.csv("two_level.csv", two);
    ctx.writer.csv("errors.csv", two);
    ctx.writer.fields("one_level", r.one_level.samples);
    ctx.writer.fields("two_level", r.two_level.fine.samples);
}

} // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config)
{
    config.validate();
    ExperimentOutcome outcome;
    fs::create_directories(config.output_dir);
    std::ostringstream log;
    log << std::setprecision(6);
    Context ctx{config, outcome, log, Writer{config, outcome}, make_fixture(config)};

    std::ostringstream head;
    head << "# experiment report\n\n[config]\n" << config.echo() << "\n[run]\n";
    head << "fixture: " << ctx.exact.description << '\n';

    std::string failure;
    const auto t0 = Clock::now();
    try {
        switch (config.mode) {
        case Mode::Galerkin: run_galerkin(ctx); break;
        case Mode::TwoLevel: run_two_level_mode(ctx); break;
        case Mode::ConvergenceStudy: run_convergence_study(ctx); break;
        case Mode::SingularityStudy: run_singularity_study(ctx); break;
        case Mode::Comparison: run_comparison_mode(ctx); break;
        }
    } catch (const SolverError& e) {
        failure = e.what();
    } catch (const CouplingError& e) {
        failure = e.what();
    }

    std::ostringstream tail;
    tail << "\n[checks]\n";
    bool all = true;
    for (const auto& chk : outcome.checks) {
        all = all && chk.passed;
        tail << (chk.passed ? "PASS " : "FAIL ") << chk.name << " = " << chk.value << " (expected [" << chk.lower
             << ", " << chk.upper << "])\n";
    }
    if (outcome.checks.empty())
        tail << "(none configured)\n";
    if (!failure.empty()) {
        outcome.exit_code = kExitSolverFailure;
        tail << "\n[failure]\n" << failure << '\n';
    } else {
        outcome.exit_code = all ? kExitPass : kExitRateFailure;
    }
    if (!config.deterministic)
        tail << "\nwall time: " << seconds_since(t0) << " s\n";
    tail << "\n[result]\n"
         << (outcome.exit_code == kExitPass ? "PASS" : outcome.exit_code == kExitRateFailure ? "RATE_FAILURE"
                                                                                              : "SOLVER_FAILURE")
         << " (exit " << outcome.exit_code << ")\n";

    outcome.report = head.str() + log.str() + tail.str();
    ctx.writer.write("report.txt", outcome.report);
    return outcome;
}

} // namespace tlns
