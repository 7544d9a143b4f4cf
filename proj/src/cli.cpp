#include "freedyson/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "freedyson/entropy.hpp"
#include "freedyson/error.hpp"
#include "freedyson/mapcount.hpp"
#include "freedyson/onematrix.hpp"
#include "freedyson/parallel.hpp"

namespace freedyson::cli {

namespace {

std::ofstream open_output(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open output file: " + path);
    return os;
}

std::string read_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// Words of degree 1..d up to rotation and reversal.
std::vector<Word> observable_words(int letters, std::size_t d) {
    std::vector<Word> out;
    for (std::size_t k = 1; k <= d; ++k)
        for (auto& w : necklaces(letters, k, Symmetry::dihedral)) out.push_back(std::move(w));
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Potentials and configuration

Potential PotentialSpec::build() const { return Potential::parse(text, letters, self_adjoint); }

json PotentialSpec::to_json() const {
    return {{"text", text}, {"letters", letters}, {"self_adjoint", self_adjoint}};
}

PotentialSpec read_potential_file(const std::string& path, int letters, bool self_adjoint) {
    std::istringstream in(read_text(path));
    std::string line, text;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        text += (text.empty() ? "" : " ") + line;
    }
    if (text.empty()) throw ValidationError("potential file is empty: " + path);
    return {text, letters, self_adjoint};
}

namespace {

class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ValidationError(where_ + " must be an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        for (const auto& [k, v] : j_.items())
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
                throw ValidationError("unknown key '" + where_ + "." + k + "'");
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key) const { return j_.at(key); }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_number()) throw ValidationError(path(key) + " must be a number");
        return j_.at(key).get<double>();
    }
    long integer(const char* key, long fallback, long min) const {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_number_integer()) throw ValidationError(path(key) + " must be an integer");
        const long v = j_.at(key).get<long>();
        if (v < min) throw ValidationError(path(key) + " must be at least " + std::to_string(min));
        return v;
    }
    bool boolean(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_boolean()) throw ValidationError(path(key) + " must be true or false");
        return j_.at(key).get<bool>();
    }
    std::string string(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_string()) throw ValidationError(path(key) + " must be a string");
        return j_.at(key).get<std::string>();
    }
    std::vector<std::string> strings(const char* key) const {
        if (!has(key)) return {};
        const json& a = j_.at(key);
        if (!a.is_array() || !std::all_of(a.begin(), a.end(), [](const json& x) { return x.is_string(); }))
            throw ValidationError(path(key) + " must be an array of strings");
        return a.get<std::vector<std::string>>();
    }
    std::vector<std::size_t> sizes(const char* key, std::vector<std::size_t> fallback) const {
        if (!has(key)) return fallback;
        const json& a = j_.at(key);
        if (!a.is_array() || a.empty() ||
            !std::all_of(a.begin(), a.end(), [](const json& x) { return x.is_number_unsigned() && x.get<long>() > 0; }))
            throw ValidationError(path(key) + " must be a nonempty array of positive integers");
        return a.get<std::vector<std::size_t>>();
    }

private:
    std::string path(const char* key) const { return where_ + "." + key; }

    const json& j_;
    std::string where_;
};

}  // namespace

RunConfig parse_run_config(const json& j, const std::string& base_dir) {
    Reader top(j, "config");
    top.allow({"subcommand", "potential", "sim", "sd", "maps", "crosscheck", "output"});
    RunConfig c;
    c.subcommand = top.string("subcommand", "");

    if (!top.has("potential")) throw ValidationError("config.potential is required");
    Reader pot(top.raw("potential"), "potential");
    pot.allow({"text", "file", "letters", "self_adjoint"});
    const int letters = static_cast<int>(pot.integer("letters", 0, 0));
    const bool sa = pot.boolean("self_adjoint", true);
    if (pot.has("text") == pot.has("file")) throw ValidationError("potential needs exactly one of 'text' or 'file'");
    if (pot.has("text")) {
        c.potential = {pot.string("text", ""), letters, sa};
    } else {
        std::filesystem::path file = pot.string("file", "");
        if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
        c.potential = read_potential_file(file.string(), letters, sa);
    }

    if (top.has("sim")) {
        Reader s(top.raw("sim"), "sim");
        s.allow({"N", "dt", "t_max", "burn_in", "seed", "norm_cap", "clip", "stride", "observables", "spectrum_every"});
        SimConfig& cfg = c.sim.config;
        cfg.n = static_cast<std::size_t>(s.integer("N", static_cast<long>(cfg.n), 1));
        cfg.dt = s.number("dt", cfg.dt);
        cfg.t_max = s.number("t_max", cfg.t_max);
        cfg.burn_in = s.number("burn_in", cfg.burn_in);
        cfg.seed = static_cast<std::uint64_t>(s.integer("seed", static_cast<long>(cfg.seed), 0));
        cfg.norm_cap = s.number("norm_cap", cfg.norm_cap);
        cfg.clip = s.boolean("clip", cfg.clip);
        cfg.stride = static_cast<std::size_t>(s.integer("stride", static_cast<long>(cfg.stride), 1));
        c.sim.observables = s.strings("observables");
        c.sim.spectrum_every = static_cast<std::size_t>(s.integer("spectrum_every", 0, 0));
    }
    if (top.has("sd")) {
        Reader s(top.raw("sd"), "sd");
        s.allow({"degree", "order", "bound", "damping", "tol", "max_iter"});
        FixedPointOptions& fp = c.fixed_point;
        fp.degree = static_cast<std::size_t>(s.integer("degree", static_cast<long>(fp.degree), 1));
        c.order = static_cast<int>(s.integer("order", c.order, 0));
        fp.bound = s.number("bound", fp.bound);
        fp.damping = s.number("damping", fp.damping);
        fp.tol = s.number("tol", fp.tol);
        fp.max_iter = s.integer("max_iter", fp.max_iter, 1);
        if (!(fp.damping > 0.0 && fp.damping <= 1.0)) throw ValidationError("sd.damping must lie in (0, 1]");
        if (!(fp.tol > 0.0)) throw ValidationError("sd.tol must be positive");
    }
    if (top.has("maps")) {
        Reader s(top.raw("maps"), "maps");
        s.allow({"max_half_edges"});
        c.max_half_edges = static_cast<std::size_t>(s.integer("max_half_edges", static_cast<long>(c.max_half_edges), 0));
    }
    if (top.has("crosscheck")) {
        Reader s(top.raw("crosscheck"), "crosscheck");
        s.allow({"sizes"});
        c.crosscheck_sizes = s.sizes("sizes", c.crosscheck_sizes);
    }
    if (top.has("output")) {
        Reader s(top.raw("output"), "output");
        s.allow({"observables_csv", "spectrum_csv", "summary_json", "manifest"});
        c.output.observables_csv = s.string("observables_csv", "");
        c.output.spectrum_csv = s.string("spectrum_csv", "");
        c.output.summary_json = s.string("summary_json", "");
        c.output.manifest = s.string("manifest", "");
    }
    // Fail early on a malformed potential or simulation setup.
    const Potential v = c.potential.build();
    if (top.has("sim")) validate(c.sim.config, v);
    for (const auto& o : c.sim.observables) parse_poly(o, v.letters());
    return c;
}

RunConfig load_run_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_run_config(j, std::filesystem::path(path).parent_path().string());
}

json RunConfig::to_json() const {
    const Potential v = potential.build();
    const SimConfig& s = sim.config;
    json j;
    j["subcommand"] = subcommand;
    j["potential"] = potential.to_json();
    j["potential"]["quadratic_weight"] = v.quadratic_weight();
    j["sim"] = {{"N", s.n},
                {"dt", s.dt},
                {"t_max", s.resolved_t_max(v)},
                {"burn_in", s.resolved_burn_in(v)},
                {"seed", s.seed},
                {"norm_cap", s.resolved_norm_cap(v)},
                {"clip", s.clip},
                {"stride", s.stride},
                {"observables", sim.observables},
                {"spectrum_every", sim.spectrum_every}};
    j["sd"] = {{"degree", fixed_point.degree},   {"order", order},
               {"bound", fixed_point.bound},     {"damping", fixed_point.damping},
               {"tol", fixed_point.tol},         {"max_iter", fixed_point.max_iter}};
    j["maps"] = {{"max_half_edges", max_half_edges}};
    j["crosscheck"] = {{"sizes", crosscheck_sizes}};
    j["output"] = {{"observables_csv", output.observables_csv},
                   {"spectrum_csv", output.spectrum_csv},
                   {"summary_json", output.summary_json},
                   {"manifest", output.manifest}};
    return j;
}

std::string config_hash(const json& config) {
    const std::string text = config.dump();  // keys are sorted by nlohmann::json
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw NumericError("SHA-256 failed");
    std::ostringstream os;
    for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
    return os.str();
}

json make_manifest(const std::string& subcommand, const json& config, std::optional<std::uint64_t> seed) {
    json m;
    m["tool"] = "freedyson";
    m["version"] = kVersion;
    m["subcommand"] = subcommand;
    m["config"] = config;
    m["config_hash"] = config_hash(config);
    m["seed"] = seed ? json(*seed) : json(nullptr);
    m["threads"] = thread_count();
    return m;
}

namespace {

json fixed_point_json(const FixedPointOptions& fp) {
    return {{"degree", fp.degree}, {"bound", fp.bound},         {"damping", fp.damping},
            {"tol", fp.tol},       {"max_iter", fp.max_iter}, {"max_words", fp.max_words}};
}

}  // namespace

// ---------------------------------------------------------------------------
// derive

json derive(const DeriveOptions& o, std::ostream& out) {
    const NCPoly p = parse_poly(o.polynomial, o.letters);
    std::vector<int> which;
    if (o.letter != 0)
        which.push_back(o.letter);
    else
        for (int i = 1; i <= p.letters(); ++i) which.push_back(i);
    json result = json::array();
    for (int i : which) {
        const NCPoly d = cyclic_gradient(p, i);
        const TensorPoly t = nc_derivative(p, i);
        out << "D" << i << " = " << to_string(d) << '\n';
        out << "d" << i << " = " << to_string(t) << '\n';
        json r = {{"letter", i}, {"cyclic_gradient", to_string(d)}, {"nc_derivative", to_string(t)}};
        if (p.has_star()) {
            const NCPoly ds = starred_cyclic_gradient(p, i);
            const TensorPoly ts = starred_nc_derivative(p, i);
            out << "D" << i << "* = " << to_string(ds) << '\n';
            out << "d" << i << "* = " << to_string(ts) << '\n';
            r["starred_cyclic_gradient"] = to_string(ds);
            r["starred_nc_derivative"] = to_string(ts);
        }
        result.push_back(r);
    }
    json config = {{"polynomial", o.polynomial}, {"letters", p.letters()}, {"letter", o.letter}};
    json m = make_manifest("derive", config, std::nullopt);
    m["result"] = result;
    return m;
}

// ---------------------------------------------------------------------------
// solve-sd

json solve_sd(const SolveOptions& o, std::ostream& out) {
    const Potential v = o.potential.build();
    json config = {{"potential", o.potential.to_json()}, {"fixed_point", fixed_point_json(o.fixed_point)}};
    if (!o.order) {
        const FixedPointResult r = solve_fixed_point(v, o.fixed_point);
        r.tau.write_csv(out);
        json m = make_manifest("solve-sd", config, std::nullopt);
        m["result"] = {{"mode", "fixed_point"},
                       {"iterations", r.iterations},
                       {"max_residual", r.max_residual},
                       {"internal_degree", r.internal_degree},
                       {"truncation_error", r.truncation_error},
                       {"bound", r.bound},
                       {"moment_degree", r.tau.max_degree()}};
        return m;
    }

    std::vector<Word> templates;
    std::vector<cplx> beta;
    for (const auto& c : v.couplings()) {
        templates.push_back(c.monomial);
        beta.push_back(c.beta);
    }
    if (!o.beta.empty()) {
        if (o.beta.size() != templates.size())
            throw ValidationError("--beta needs " + std::to_string(templates.size()) + " values (one per coupling)");
        std::transform(o.beta.begin(), o.beta.end(), beta.begin(), [](double b) { return cplx(b, 0.0); });
    }
    const BetaSeries s = solve_series(templates, v.letters(), v.quadratic_weight(), *o.order, o.fixed_point.degree);
    if (!o.series_json.empty()) {
        auto os = open_output(o.series_json);
        os << s.to_json() << '\n';
    }
    out << "word,degree,real,imag,tail_estimate\n";
    out.precision(17);
    for (std::size_t d = 0; d <= o.fixed_point.degree; ++d)
        for (const auto& w : necklaces(v.letters(), d, Symmetry::cyclic)) {
            const SeriesValue val = evaluate_series(s, beta, w);
            out << to_string(w) << ',' << d << ',' << val.value.real() << ',' << val.value.imag() << ','
                << val.tail_estimate << '\n';
        }
    config["order"] = *o.order;
    config["beta"] = json::array();
    for (const auto& b : beta) config["beta"].push_back({b.real(), b.imag()});
    config["series_json"] = o.series_json;
    json m = make_manifest("solve-sd", config, std::nullopt);
    m["result"] = {{"mode", "series"}, {"templates", templates.size()}, {"coefficients", s.multi_indices().size()}};
    return m;
}

// ---------------------------------------------------------------------------
// count-maps

json count_maps(const CountOptions& o, std::ostream& out) {
    auto stars = parse_star_list(o.stars, o.letters);
    std::optional<Word> observable;
    if (!o.observable.empty()) observable = parse_word(o.observable, o.letters);
    int letters = std::max(1, o.letters);
    for (const auto& [q, k] : stars) letters = std::max(letters, q.max_index());
    if (observable) letters = std::max(letters, observable->max_index());
    const StarSystem system{letters, std::move(stars), observable};
    const BigInt count = ::freedyson::count_maps(system, o.genus, freedyson::CountOptions{o.max_half_edges});

    json result = {{"system", system.describe()}, {"genus", o.genus}, {"half_edges", system.half_edges()}};
    if (count <= std::numeric_limits<std::uint64_t>::max())
        result["count"] = count.convert_to<std::uint64_t>();
    else
        result["count"] = count.str();
    out << result.dump() << '\n';

    json config = {{"stars", o.stars},   {"observable", o.observable},         {"letters", letters},
                   {"genus", o.genus}, {"max_half_edges", o.max_half_edges}};
    json m = make_manifest("count-maps", config, std::nullopt);
    m["result"] = result;
    return m;
}

// ---------------------------------------------------------------------------
// one-matrix

json one_matrix(const OneMatrixOptions& o, std::ostream& out) {
    if (o.moments < 0) throw ValidationError("--moments must be nonnegative");
    if (o.density_grid < 2) throw ValidationError("--density-grid needs at least 2 points");
    const OneCutSolution sol = solve_one_cut(o.beta);
    const auto m = moments(sol, o.moments);
    const double a = sol.support_edge();
    out.precision(17);
    out << "x,density\n";
    for (int k = 0; k < o.density_grid; ++k) {
        const double x = -a + 2.0 * a * k / (o.density_grid - 1);
        out << x << ',' << sol.density(x) << '\n';
    }
    out << "\nk,moment\n";
    for (std::size_t k = 0; k < m.size(); ++k) out << k << ',' << m[k] << '\n';

    json config = {{"beta", o.beta}, {"moments", o.moments}, {"density_grid", o.density_grid}};
    json man = make_manifest("one-matrix", config, std::nullopt);
    man["result"] = {{"edge", a},
                     {"convex", sol.convex()},
                     {"p_constant", sol.p_constant()},
                     {"p_quadratic", sol.p_quadratic()},
                     {"density_constant", sol.density_constant()},
                     {"density_quadratic", sol.density_quadratic()}};
    return man;
}

// ---------------------------------------------------------------------------
// simulate / spectrum

namespace {

std::optional<MatrixEnsemble> resume_from(const std::string& checkpoint) {
    if (checkpoint.empty() || !std::filesystem::exists(checkpoint)) return std::nullopt;
    return read_checkpoint(checkpoint);
}

json stats_json(const SimulationResult& r) {
    json obs = json::array();
    for (const auto& s : r.observables)
        obs.push_back({{"word", s.name},
                       {"mean", s.mean},
                       {"standard_error", s.standard_error},
                       {"drift", s.drift},
                       {"drift_t", s.drift_t}});
    return {{"observables", obs},
            {"samples", r.samples},
            {"final_time", r.final_state.time},
            {"max_norm", r.max_norm},
            {"max_hermiticity_defect", r.max_hermiticity_defect},
            {"stream_position", r.final_state.rng.position()}};
}

}  // namespace

json simulate(const SimulateOptions& o, std::ostream& out) {
    const RunConfig& c = o.config;
    const Potential v = c.potential.build();
    std::vector<NCPoly> observables;
    for (const auto& t : c.sim.observables) observables.push_back(parse_poly(t, v.letters()));

    std::ofstream file;
    if (!c.output.observables_csv.empty()) file = open_output(c.output.observables_csv);
    std::ostream& csv = c.output.observables_csv.empty() ? out : file;
    csv.precision(17);
    csv << "t,word,real,imag\n";

    SimulationHooks hooks;
    hooks.spectrum_every = c.sim.spectrum_every;
    hooks.on_sample = [&](double t, const std::vector<cplx>& values) {
        for (std::size_t k = 0; k < values.size(); ++k)
            csv << t << ',' << c.sim.observables[k] << ',' << values[k].real() << ',' << values[k].imag() << '\n';
    };
    auto start = resume_from(o.checkpoint);
    const bool resumed = start.has_value();
    const SimulationResult r = ::freedyson::simulate(v, c.sim.config, observables, std::move(start), hooks);
    if (!o.checkpoint.empty()) write_checkpoint(o.checkpoint, r.final_state);

    if (!c.output.spectrum_csv.empty()) {
        auto os = open_output(c.output.spectrum_csv);
        os.precision(17);
        os << "index,eigenvalue\n";
        const auto& ev = r.pooled_spectrum;
        for (std::size_t k = 0; k < ev.size(); ++k) os << k << ',' << ev[k] << '\n';
    }
    json summary = stats_json(r);
    summary["resumed"] = resumed;
    if (!c.output.summary_json.empty()) {
        auto os = open_output(c.output.summary_json);
        os << summary.dump(2) << '\n';
    }
    json config = c.to_json();
    config["checkpoint"] = o.checkpoint;
    json m = make_manifest("simulate", config, c.sim.config.seed);
    m["result"] = summary;
    return m;
}

json spectrum(const SpectrumOptions& o, std::ostream& out) {
    const RunConfig& c = o.config;
    const Potential v = c.potential.build();
    const NCPoly p = parse_poly(o.observable, v.letters());
    auto start = resume_from(o.checkpoint);
    MatrixEnsemble state;
    if (start) {
        if (start->letters() != v.letters()) throw ValidationError("checkpoint does not match the potential");
        state = std::move(*start);
    } else {
        state = ::freedyson::simulate(v, c.sim.config, {}).final_state;
        if (!o.checkpoint.empty()) write_checkpoint(o.checkpoint, state);
    }
    const SpectralReport r = spectral_report(state, p, o.gap);
    out.precision(17);
    out << "index,eigenvalue\n";
    for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) out << k << ',' << r.eigenvalues[k] << '\n';

    json config = c.to_json();
    config["observable"] = o.observable;
    config["checkpoint"] = o.checkpoint;
    config["gap"] = {{"k_edge", o.gap.k_edge}, {"ratio_threshold", o.gap.ratio_threshold}, {"abs_fraction", o.gap.abs_fraction}};
    json m = make_manifest("spectrum", config, c.sim.config.seed);
    m["result"] = {{"observable", r.observable},
                   {"connected", r.connected},
                   {"gap_location", r.gap_location},
                   {"gap_width", r.gap_width},
                   {"relative_width", r.relative_width},
                   {"time", state.time}};
    return m;
}

// ---------------------------------------------------------------------------
// entropy

json entropy(const EntropyCliOptions& o, std::ostream& out) {
    const Potential v = o.potential.build();
    EntropyOptions opts;
    opts.nodes = o.nodes;
    opts.fixed_point = o.fixed_point;
    const EntropyReport r = free_entropy(v, opts);
    json report = {{"chi", r.chi},
                   {"gaussian_constant", r.gaussian_constant},
                   {"integral", r.integral},
                   {"integral_error", r.integral_error},
                   {"tau_v", r.tau_v},
                   {"quadratic_weight", r.quadratic_weight},
                   {"letters", r.letters},
                   {"t_nodes", r.t_nodes},
                   {"t_weights", r.t_weights},
                   {"integrand", r.integrand}};
    out << report.dump(2) << '\n';
    json config = {{"potential", o.potential.to_json()}, {"nodes", o.nodes}, {"fixed_point", fixed_point_json(o.fixed_point)}};
    json m = make_manifest("entropy", config, std::nullopt);
    m["result"] = {{"chi", r.chi}};
    return m;
}

// ---------------------------------------------------------------------------
// crosscheck

bool CrosscheckReport::all_pass() const {
    return std::none_of(cells.begin(), cells.end(), [](const CrosscheckCell& c) { return c.status == "fail"; });
}

json CrosscheckReport::to_json() const {
    json a = json::array();
    for (const auto& c : cells) {
        json j = {{"left", c.left},
                  {"right", c.right},
                  {"quantity", c.quantity},
                  {"discrepancy", std::isfinite(c.discrepancy) ? json(c.discrepancy) : json(nullptr)},
                  {"tolerance", std::isfinite(c.tolerance) ? json(c.tolerance) : json(nullptr)},
                  {"status", c.status}};
        if (!c.note.empty()) j["note"] = c.note;
        a.push_back(j);
    }
    std::size_t pass = 0, fail = 0, skipped = 0;
    for (const auto& c : cells) (c.status == "pass" ? pass : c.status == "fail" ? fail : skipped)++;
    return {{"cells", a}, {"pass", pass}, {"fail", fail}, {"skipped", skipped}, {"all_pass", all_pass()}};
}

namespace {

CrosscheckCell compare(std::string left, std::string right, std::string quantity, double discrepancy, double tolerance) {
    CrosscheckCell c{std::move(left), std::move(right), std::move(quantity), discrepancy, tolerance, "", ""};
    c.status = discrepancy <= tolerance ? "pass" : "fail";
    return c;
}

CrosscheckCell skipped(std::string left, std::string right, std::string quantity, std::string why) {
    return {std::move(left), std::move(right), std::move(quantity), std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::quiet_NaN(), "skipped", std::move(why)};
}

std::string tau_of(const Word& w) { return "tau(" + to_string(w) + ")"; }

// V = (c/2)x² + βx⁴ with one letter.
std::optional<double> even_quartic_beta(const Potential& v) {
    if (v.letters() != 1) return std::nullopt;
    double beta = 0.0;
    for (const auto& c : v.couplings()) {
        if (c.monomial != Word::power(1, 4)) return std::nullopt;
        beta += c.beta.real();
    }
    return beta;
}

template <class F>
auto with_context(const std::string& what, F f) {
    try {
        return f();
    } catch (const Error& e) {
        const std::string msg = what + ": " + e.what();
        switch (e.code()) {
            case ExitCode::validation: throw ValidationError(msg);
            case ExitCode::infeasible: throw InfeasibleError(msg);
            default: throw NumericError(msg);
        }
    }
}

}  // namespace

CrosscheckReport run_crosscheck(const CrosscheckOptions& o) {
    const Potential v = o.potential.build();
    const int m = v.letters();
    FixedPointOptions fp = o.fixed_point;
    fp.degree = std::max(fp.degree, o.observable_degree);
    const auto words = observable_words(m, o.observable_degree);
    CrosscheckReport report;

    const FixedPointResult fixed = with_context("sdsolver fixed point", [&] { return solve_fixed_point(v, fp); });
    auto tau = [&](const Word& w) { return fixed.tau(w).real(); };

    // Series, lowering the order until the word budget fits.
    std::vector<Word> templates;
    std::vector<cplx> beta;
    for (const auto& c : v.couplings()) {
        templates.push_back(c.monomial);
        beta.push_back(c.beta);
    }
    std::optional<BetaSeries> series;
    int order = o.order;
    for (; order >= 1 && !series; --order) {
        try {
            series = solve_series(templates, m, v.quadratic_weight(), order, o.observable_degree);
        } catch (const InfeasibleError&) {
        }
    }
    const std::string series_name = series ? "sdsolver.series(K=" + std::to_string(series->order()) + ")" : "sdsolver.series";
    for (const auto& w : words) {
        if (!series) {
            report.cells.push_back(skipped(series_name, "sdsolver.fixed_point", tau_of(w), "no feasible series order"));
            continue;
        }
        const SeriesValue s = series->evaluate(beta, w);
        if (!std::isfinite(s.tail_estimate)) {
            report.cells.push_back(skipped(series_name, "sdsolver.fixed_point", tau_of(w), "series rate ≥ 1 at this β"));
            continue;
        }
        report.cells.push_back(compare(series_name, "sdsolver.fixed_point", tau_of(w), std::abs(s.value.real() - tau(w)),
                                       1e-6 + 2.0 * s.tail_estimate));
    }

    // Planar-map certificates against exhaustive enumeration.
    if (series && v.quadratic_weight() == 1.0) {
        for (const auto& k : series->multi_indices()) {
            for (const auto& w : words) {
                if (w.degree() > 4) continue;
                StarSystem sys{m, {}, w};
                std::string label = "M0(";
                for (std::size_t j = 0; j < k.size(); ++j) {
                    if (k[j] == 0) continue;
                    sys.stars.emplace_back(templates[j], k[j]);
                    label += "(" + to_string(templates[j]) + "," + std::to_string(k[j]) + "),";
                }
                label += "(" + to_string(w) + ",1))";
                if (sys.half_edges() > o.max_half_edges) {
                    report.cells.push_back(skipped("sdsolver.certificate", "mapcount", label, "above enumeration cap"));
                    continue;
                }
                const BigInt count = with_context("mapcount", [&] {
                    return ::freedyson::count_maps(sys, 0, freedyson::CountOptions{o.max_half_edges});
                });
                const double cert = series->map_certificate(k, w);
                const double exact = count.convert_to<double>();
                CrosscheckCell cell = compare("sdsolver.certificate", "mapcount", label, std::abs(cert - exact),
                                              1e-9 * std::max(1.0, exact));
                if (std::llround(cert) != count.convert_to<long long>()) cell.status = "fail";
                report.cells.push_back(cell);
            }
        }
    } else {
        report.cells.push_back(skipped("sdsolver.certificate", "mapcount", "M0", series ? "map counts need quadratic weight 1" : "no series"));
    }

    // Analytic one-cut solution.
    const auto quartic = even_quartic_beta(v);
    std::optional<OneCutSolution> sol;
    if (quartic) {
        const double c = v.quadratic_weight();
        try {
            sol = solve_one_cut(*quartic / (c * c));
        } catch (const NumericError& e) {
            report.cells.push_back(skipped("sdsolver.fixed_point", "onematrix", "moments", e.what()));
        }
        if (sol) {
            const auto mom = moments(*sol, static_cast<int>(o.observable_degree));
            for (const auto& w : words) {
                const double scale = std::pow(c, -0.5 * static_cast<double>(w.degree()));
                report.cells.push_back(compare("sdsolver.fixed_point", "onematrix", tau_of(w),
                                               std::abs(tau(w) - mom[w.degree()] * scale), 1e-8));
            }
        }
    } else {
        report.cells.push_back(skipped("sdsolver.fixed_point", "onematrix", "moments", "not a one-letter even quartic"));
    }

    // Monte Carlo.
    if (o.no_simulation) {
        report.cells.push_back(skipped("langevin", "sdsolver.fixed_point", "moments", "simulation disabled"));
        return report;
    }
    std::vector<NCPoly> observables;
    for (const auto& w : words) observables.push_back(NCPoly(m, w));
    SimulationHooks hooks;
    if (sol) hooks.spectrum_every = 10;
    const SimulationResult r = with_context("langevin", [&] { return ::freedyson::simulate(v, o.sim, observables, std::nullopt, hooks); });
    const double n = static_cast<double>(o.sim.n);
    for (std::size_t k = 0; k < words.size(); ++k) {
        const double exact = tau(words[k]);
        const double d = static_cast<double>(words[k].degree());
        // Monte-Carlo error, genus-one correction and the O(dt) bias of the scheme.
        const double tol = 3.0 * r.observables[k].standard_error + 12.0 / (n * n) + d * o.sim.dt * std::abs(exact) / 4.0;
        report.cells.push_back(compare("langevin(N=" + std::to_string(o.sim.n) + ")", "sdsolver.fixed_point",
                                       tau_of(words[k]), std::abs(r.observables[k].mean - exact), tol));
    }
    if (sol && !r.pooled_spectrum.empty()) {
        const double scale = std::sqrt(v.quadratic_weight());
        const double ks = ks_distance(r.pooled_spectrum, [&](double x) { return sol->cdf(x * scale); });
        report.cells.push_back(compare("langevin(N=" + std::to_string(o.sim.n) + ")", "onematrix", "KS(spectrum)", ks, 0.05));
    }
    return report;
}

json crosscheck(const CrosscheckOptions& o, std::ostream& out) {
    const CrosscheckReport r = run_crosscheck(o);
    out << r.to_json().dump(2) << '\n';
    const Potential v = o.potential.build();
    const SimConfig& s = o.sim;
    json config = {{"potential", o.potential.to_json()},
                   {"fixed_point", fixed_point_json(o.fixed_point)},
                   {"order", o.order},
                   {"max_half_edges", o.max_half_edges},
                   {"observable_degree", o.observable_degree},
                   {"no_simulation", o.no_simulation},
                   {"sim",
                    {{"N", s.n},
                     {"dt", s.dt},
                     {"t_max", s.resolved_t_max(v)},
                     {"burn_in", s.resolved_burn_in(v)},
                     {"seed", s.seed},
                     {"norm_cap", s.resolved_norm_cap(v)},
                     {"clip", s.clip},
                     {"stride", s.stride}}}};
    json m = make_manifest("crosscheck", config, o.no_simulation ? std::nullopt : std::optional<std::uint64_t>(s.seed));
    m["result"] = {{"all_pass", r.all_pass()}, {"cells", r.cells.size()}};
    return m;
}

}  // namespace freedyson::cli
