// freedyson: command-line front end.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "freedyson/cli.hpp"
#include "freedyson/error.hpp"

namespace {

using namespace freedyson;

struct PotentialArgs {
    std::string file;
    std::string text;
    int letters = 0;
    bool non_self_adjoint = false;

    void add(CLI::App* app) {
        auto* f = app->add_option("--potential", file, "Potential file (ncpoly text, '#' comments)");
        auto* t = app->add_option("--poly", text, "Potential given inline");
        f->excludes(t);
        app->add_option("--letters", letters, "Ambient letter count (default: largest index used)")->check(CLI::NonNegativeNumber);
        app->add_flag("--non-self-adjoint", non_self_adjoint, "Allow starred letters");
    }

    cli::PotentialSpec spec() const {
        if (!file.empty()) return cli::read_potential_file(file, letters, !non_self_adjoint);
        if (text.empty()) throw ValidationError("one of --potential or --poly is required");
        return {text, letters, !non_self_adjoint};
    }
};

void add_fixed_point(CLI::App* app, FixedPointOptions& fp) {
    app->add_option("--degree", fp.degree, "Residual certificate covers deg P < D")->check(CLI::PositiveNumber);
    app->add_option("--bound", fp.bound, "Moment bound R (0: automatic)");
    app->add_option("--damping", fp.damping, "Damping in (0, 1]")->check(CLI::Range(1e-12, 1.0));
    app->add_option("--tol", fp.tol, "Residual tolerance")->check(CLI::PositiveNumber);
    app->add_option("--max-iter", fp.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
}

void emit_manifest(const nlohmann::json& manifest, const std::string& path) {
    if (path.empty()) {
        std::cerr << "manifest: " << manifest.dump() << '\n';
        return;
    }
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot write manifest: " + path);
    os << manifest.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Limit laws of multi-matrix models: Schwinger-Dyson moments, planar maps, Langevin sampling, free entropy"};
    app.set_version_flag("--version", std::string(cli::kVersion));
    app.require_subcommand(1);
    app.fallthrough();
    std::string manifest_path;
    app.add_option("--manifest", manifest_path, "Write the run manifest here (default: standard error)");

    // derive
    cli::DeriveOptions derive;
    auto* derive_cmd = app.add_subcommand("derive", "Print cyclic and non-commutative gradients");
    derive_cmd->add_option("polynomial", derive.polynomial, "Polynomial text")->required();
    derive_cmd->add_option("--letters", derive.letters, "Ambient letter count")->check(CLI::NonNegativeNumber);
    derive_cmd->add_option("-i,--letter", derive.letter, "Letter index (default: all)")->check(CLI::NonNegativeNumber);

    // solve-sd
    cli::SolveOptions solve;
    PotentialArgs solve_pot;
    int order = -1;
    auto* solve_cmd = app.add_subcommand("solve-sd", "Solve the Schwinger-Dyson equations (fixed point or series)");
    solve_pot.add(solve_cmd);
    add_fixed_point(solve_cmd, solve.fixed_point);
    solve_cmd->add_option("--order", order, "Series mode with this order cap")->check(CLI::NonNegativeNumber);
    solve_cmd->add_option("--beta", solve.beta, "Couplings for series evaluation")->delimiter(',');
    solve_cmd->add_option("--series-out", solve.series_json, "Write the series coefficients as JSON");

    // count-maps
    cli::CountOptions count;
    auto* count_cmd = app.add_subcommand("count-maps", "Count colored maps by exhaustive gluing");
    count_cmd->add_option("--stars", count.stars, "Star list, e.g. \"x4:2,X1X2X1X2:1\"")->required();
    count_cmd->add_option("--observable", count.observable, "Extra star of this type");
    count_cmd->add_option("--genus", count.genus, "Genus")->check(CLI::NonNegativeNumber);
    count_cmd->add_option("--letters", count.letters, "Ambient letter count")->check(CLI::NonNegativeNumber);
    count_cmd->add_option("--max-half-edges", count.max_half_edges, "Enumeration cap")->check(CLI::Range(0, 32));

    // one-matrix
    cli::OneMatrixOptions one;
    auto* one_cmd = app.add_subcommand("one-matrix", "One-cut solution of V = x^2/2 + beta x^4");
    one_cmd->add_option("--beta", one.beta, "Quartic coupling")->required();
    one_cmd->add_option("--moments", one.moments, "Highest moment")->check(CLI::NonNegativeNumber);
    one_cmd->add_option("--density-grid", one.density_grid, "Density grid points")->check(CLI::Range(2, 10'000'000));

    // simulate
    std::string sim_config;
    cli::SimulateOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Run the matrix Langevin diffusion");
    sim_cmd->add_option("--config", sim_config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--checkpoint", sim.checkpoint, "Resume from and save to this checkpoint");

    // spectrum
    std::string spec_config;
    cli::SpectrumOptions spec;
    auto* spec_cmd = app.add_subcommand("spectrum", "Eigenvalues of P(X) and the support-gap verdict");
    spec_cmd->add_option("--config", spec_config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    spec_cmd->add_option("--checkpoint", spec.checkpoint, "Use this state if it exists, else simulate and save");
    spec_cmd->add_option("--observable", spec.observable, "Self-adjoint observable P");
    spec_cmd->add_option("--k-edge", spec.gap.k_edge, "Extreme eigenvalues ignored per side");
    spec_cmd->add_option("--ratio", spec.gap.ratio_threshold, "Gap over median spacing threshold");
    spec_cmd->add_option("--abs-fraction", spec.gap.abs_fraction, "Gap over spectral range threshold");

    // entropy
    cli::EntropyCliOptions ent;
    PotentialArgs ent_pot;
    auto* ent_cmd = app.add_subcommand("entropy", "Free entropy by coupling interpolation");
    ent_pot.add(ent_cmd);
    ent_cmd->add_option("--nodes", ent.nodes, "Gauss-Legendre nodes")->check(CLI::PositiveNumber);
    add_fixed_point(ent_cmd, ent.fixed_point);

    // crosscheck
    cli::CrosscheckOptions cross;
    PotentialArgs cross_pot;
    auto* cross_cmd = app.add_subcommand("crosscheck", "Compare all methods on one potential");
    cross_pot.add(cross_cmd);
    add_fixed_point(cross_cmd, cross.fixed_point);
    cross_cmd->add_option("--order", cross.order, "Series order cap")->check(CLI::PositiveNumber);
    cross_cmd->add_option("--max-half-edges", cross.max_half_edges, "Map enumeration cap")->check(CLI::Range(0, 32));
    cross_cmd->add_option("--observable-degree", cross.observable_degree, "Compare words up to this degree")
        ->check(CLI::PositiveNumber);
    cross_cmd->add_option("--N", cross.sim.n, "Matrix size for the simulation")->check(CLI::PositiveNumber);
    cross_cmd->add_option("--dt", cross.sim.dt, "Time step")->check(CLI::PositiveNumber);
    cross_cmd->add_option("--t-max", cross.sim.t_max, "Final time (default 50/c)");
    cross_cmd->add_option("--burn-in", cross.sim.burn_in, "Burn-in time (default 10/c)");
    cross_cmd->add_option("--seed", cross.sim.seed, "Noise seed");
    cross_cmd->add_flag("--no-simulation", cross.no_simulation, "Skip the Monte-Carlo column");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitCode::validation);
    }

    try {
        nlohmann::json manifest;
        std::cout.precision(17);
        if (*derive_cmd) {
            manifest = cli::derive(derive, std::cout);
        } else if (*solve_cmd) {
            solve.potential = solve_pot.spec();
            if (order >= 0) solve.order = order;
            manifest = cli::solve_sd(solve, std::cout);
        } else if (*count_cmd) {
            manifest = cli::count_maps(count, std::cout);
        } else if (*one_cmd) {
            manifest = cli::one_matrix(one, std::cout);
        } else if (*sim_cmd) {
            sim.config = cli::load_run_config(sim_config);
            manifest = cli::simulate(sim, std::cout);
            if (manifest_path.empty()) manifest_path = sim.config.output.manifest;
        } else if (*spec_cmd) {
            spec.config = cli::load_run_config(spec_config);
            manifest = cli::spectrum(spec, std::cout);
            if (manifest_path.empty()) manifest_path = spec.config.output.manifest;
        } else if (*ent_cmd) {
            ent.potential = ent_pot.spec();
            manifest = cli::entropy(ent, std::cout);
        } else if (*cross_cmd) {
            cross.potential = cross_pot.spec();
            manifest = cli::crosscheck(cross, std::cout);
            emit_manifest(manifest, manifest_path);
            return manifest["result"]["all_pass"].get<bool>() ? 0 : static_cast<int>(ExitCode::numeric);
        }
        emit_manifest(manifest, manifest_path);
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::numeric);
    }
}
