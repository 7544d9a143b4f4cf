#pragma once

// Command implementations behind the freedyson executable. Each command
// reads its inputs, writes its outputs and returns a JSON manifest that
// records the fully resolved configuration.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "freedyson/langevin.hpp"
#include "freedyson/ncpoly.hpp"
#include "freedyson/sdsolver.hpp"

namespace freedyson::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.3.0";

/// Potential text plus mode flags. Lines starting with '#' are comments.
struct PotentialSpec {
    std::string text;
    int letters = 0;
    bool self_adjoint = true;

    Potential build() const;
    json to_json() const;
};

PotentialSpec read_potential_file(const std::string& path, int letters = 0, bool self_adjoint = true);

struct SimSection {
    SimConfig config;
    std::vector<std::string> observables;
    /// Pool X1 eigenvalues every this many samples (0 = never).
    std::size_t spectrum_every = 0;
};

struct OutputSection {
    std::string observables_csv;  // empty: standard output
    std::string spectrum_csv;
    std::string summary_json;
    std::string manifest;
};

/// Contents of a JSON run configuration:
///
///   {"potential": {"text": "...", "letters": 1, "self_adjoint": true},
///    "sim": {"N": 50, "dt": 0.001, "t_max": 50, "burn_in": 10, "seed": 1,
///            "norm_cap": 0, "clip": false, "stride": 10,
///            "observables": ["x2"], "spectrum_every": 0},
///    "sd": {"degree": 8, "order": 8, "bound": 0, "damping": 0.5,
///           "tol": 1e-12, "max_iter": 100000},
///    "maps": {"max_half_edges": 16},
///    "crosscheck": {"sizes": [50], "seeds": 1},
///    "output": {"observables_csv": "", "spectrum_csv": "",
///               "summary_json": "", "manifest": ""}}
///
/// "potential.file" may replace "potential.text". Unknown keys and wrong
/// types are validation errors.
struct RunConfig {
    std::string subcommand;
    PotentialSpec potential;
    SimSection sim;
    FixedPointOptions fixed_point;
    int order = 8;
    std::size_t max_half_edges = 16;
    std::vector<std::size_t> crosscheck_sizes{50};
    OutputSection output;

    /// Every field with its resolved value.
    json to_json() const;
};

RunConfig parse_run_config(const json& j, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

/// Hex SHA-256 of the canonical (sorted, compact) serialization.
std::string config_hash(const json& config);
json make_manifest(const std::string& subcommand, const json& config, std::optional<std::uint64_t> seed);

// ---------------------------------------------------------------------------
// Commands. Each writes its primary output to `out` and returns the manifest.

struct DeriveOptions {
    std::string polynomial;
    int letters = 0;
    /// 0: every letter.
    int letter = 0;
};
json derive(const DeriveOptions& o, std::ostream& out);

struct SolveOptions {
    PotentialSpec potential;
    FixedPointOptions fixed_point;
    /// Series mode when set.
    std::optional<int> order;
    /// Overrides the couplings' β for series evaluation.
    std::vector<double> beta;
    std::string series_json;
};
json solve_sd(const SolveOptions& o, std::ostream& out);

struct CountOptions {
    std::string stars;
    std::string observable;
    int letters = 0;
    int genus = 0;
    std::size_t max_half_edges = 16;
};
json count_maps(const CountOptions& o, std::ostream& out);

struct OneMatrixOptions {
    double beta = 0.0;
    int moments = 10;
    int density_grid = 512;
};
json one_matrix(const OneMatrixOptions& o, std::ostream& out);

struct SimulateOptions {
    RunConfig config;
    std::string checkpoint;
};
json simulate(const SimulateOptions& o, std::ostream& out);

struct SpectrumOptions {
    RunConfig config;
    std::string checkpoint;
    std::string observable = "x";
    GapParams gap;
};
json spectrum(const SpectrumOptions& o, std::ostream& out);

struct EntropyCliOptions {
    PotentialSpec potential;
    int nodes = 16;
    FixedPointOptions fixed_point;
};
json entropy(const EntropyCliOptions& o, std::ostream& out);

struct CrosscheckOptions {
    PotentialSpec potential;
    FixedPointOptions fixed_point;
    int order = 12;
    std::size_t max_half_edges = 16;
    /// Highest observable degree compared across methods.
    std::size_t observable_degree = 6;
    SimConfig sim;
    /// Skip the Monte-Carlo column.
    bool no_simulation = false;
};

/// One pairwise comparison.
struct CrosscheckCell {
    std::string left;
    std::string right;
    std::string quantity;
    double discrepancy = 0.0;
    double tolerance = 0.0;
    /// "pass", "fail" or "skipped".
    std::string status;
    std::string note;
};

struct CrosscheckReport {
    std::vector<CrosscheckCell> cells;
    bool all_pass() const;
    json to_json() const;
};

CrosscheckReport run_crosscheck(const CrosscheckOptions& o);
json crosscheck(const CrosscheckOptions& o, std::ostream& out);

}  // namespace freedyson::cli
