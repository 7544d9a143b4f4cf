#include "freedyson/mapcount.hpp"

#include <algorithm>
#include <numeric>

#include "freedyson/error.hpp"
#include "freedyson/parallel.hpp"

namespace freedyson {

std::vector<Star> StarSystem::expand() const {
    std::vector<Star> out;
    int label = 0;
    for (const auto& [q, k] : stars)
        for (int c = 0; c < k; ++c) out.push_back({q, label++});
    if (observable) out.push_back({*observable, label++});
    return out;
}

std::size_t StarSystem::half_edges() const {
    std::size_t h = 0;
    for (const auto& [q, k] : stars) h += q.degree() * static_cast<std::size_t>(k);
    if (observable) h += observable->degree();
    return h;
}

bool StarSystem::parity_ok() const {
    std::vector<std::size_t> per_color(static_cast<std::size_t>(letters) + 1, 0);
    for (const auto& s : expand())
        for (const auto& l : s.type) ++per_color[static_cast<std::size_t>(l.index)];
    return std::all_of(per_color.begin(), per_color.end(), [](std::size_t c) { return c % 2 == 0; });
}

std::string StarSystem::describe() const {
    std::string s;
    for (const auto& [q, k] : stars) s += (s.empty() ? "" : ", ") + ("(" + to_string(q) + ", " + std::to_string(k) + ")");
    if (observable) s += (s.empty() ? "" : ", ") + ("(" + to_string(*observable) + ", 1)");
    return "{" + s + "}";
}

std::vector<std::pair<Word, int>> parse_star_list(std::string_view text, int letters) {
    std::vector<std::pair<Word, int>> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view item = text.substr(pos, end - pos);
        int mult = 1;
        if (auto colon = item.rfind(':'); colon != std::string_view::npos) {
            try {
                mult = std::stoi(std::string(item.substr(colon + 1)));
            } catch (...) {
                throw ParseError("bad multiplicity in '" + std::string(item) + "'", pos + colon + 1);
            }
            item = item.substr(0, colon);
        }
        if (mult < 0) throw ValidationError("negative star multiplicity");
        Word q = parse_word(item, letters);
        if (q.has_star()) throw ValidationError("star types must be unstarred monomials");
        out.emplace_back(std::move(q), mult);
        pos = end + 1;
    }
    return out;
}

namespace {

struct Layout {
    std::vector<int> color;
    std::vector<std::size_t> next;  // rotation around the star
    std::vector<std::size_t> star_of;
    std::size_t stars = 0;
    std::size_t empty_stars = 0;  // stars without half-edges
};

Layout layout_of(const StarSystem& system) {
    Layout lay;
    const auto stars = system.expand();
    lay.stars = stars.size();
    for (std::size_t s = 0; s < stars.size(); ++s) {
        const Word& q = stars[s].type;
        if (q.has_star()) throw ValidationError("star types must be unstarred monomials");
        if (q.max_index() > system.letters) throw ValidationError("letter out of range in star " + to_string(q));
        if (q.empty()) ++lay.empty_stars;
        const std::size_t base = lay.color.size();
        for (std::size_t t = 0; t < q.degree(); ++t) {
            lay.color.push_back(q[t].index);
            lay.next.push_back(base + (t + 1) % q.degree());
            lay.star_of.push_back(s);
        }
    }
    return lay;
}

struct Scratch {
    std::vector<char> seen;
    std::vector<std::size_t> parent;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
}

Topology topology(const Layout& lay, const std::vector<std::size_t>& partner, Scratch& scratch) {
    const std::size_t h = lay.color.size();
    Topology t;
    t.vertices = lay.stars;
    t.edges = h / 2;
    scratch.seen.assign(h, 0);
    for (std::size_t s = 0; s < h; ++s) {
        if (scratch.seen[s]) continue;
        ++t.faces;
        for (std::size_t x = s; !scratch.seen[x]; x = lay.next[partner[x]]) scratch.seen[x] = 1;
    }
    t.faces += lay.empty_stars;
    scratch.parent.resize(lay.stars);
    std::iota(scratch.parent.begin(), scratch.parent.end(), std::size_t{0});
    std::size_t components = lay.stars;
    for (std::size_t x = 0; x < h; ++x) {
        const std::size_t a = find_root(scratch.parent, lay.star_of[x]);
        const std::size_t b = find_root(scratch.parent, lay.star_of[partner[x]]);
        if (a != b) {
            scratch.parent[a] = b;
            --components;
        }
    }
    t.components = components;
    t.connected = components <= 1;
    const long euler = static_cast<long>(t.vertices) - static_cast<long>(t.edges) + static_cast<long>(t.faces);
    t.genus = static_cast<int>((2 * static_cast<long>(components) - euler) / 2);
    return t;
}

struct Tally {
    std::vector<std::uint64_t> connected;
    std::map<int, std::uint64_t> by_exponent;
    std::uint64_t total = 0;
};

class Enumerator {
public:
    explicit Enumerator(const Layout& lay) : lay_(lay), partner_(lay.color.size(), kFree) {}

    void pin(std::size_t a, std::size_t b) {
        partner_[a] = b;
        partner_[b] = a;
    }

    void run(Tally& tally) { recurse(tally); }

private:
    static constexpr std::size_t kFree = static_cast<std::size_t>(-1);

    void recurse(Tally& tally) {
        std::size_t first = kFree;
        for (std::size_t x = 0; x < partner_.size(); ++x)
            if (partner_[x] == kFree) {
                first = x;
                break;
            }
        if (first == kFree) {
            record(tally);
            return;
        }
        for (std::size_t y = first + 1; y < partner_.size(); ++y) {
            if (partner_[y] != kFree || lay_.color[y] != lay_.color[first]) continue;
            pin(first, y);
            recurse(tally);
            partner_[first] = partner_[y] = kFree;
        }
    }

    void record(Tally& tally) {
        const Topology t = topology(lay_, partner_, scratch_);
        ++tally.total;
        const int exponent = static_cast<int>(t.faces) - static_cast<int>(t.edges) - static_cast<int>(t.vertices);
        ++tally.by_exponent[exponent];
        if (t.connected) {
            if (tally.connected.size() <= static_cast<std::size_t>(t.genus))
                tally.connected.resize(static_cast<std::size_t>(t.genus) + 1, 0);
            ++tally.connected[static_cast<std::size_t>(t.genus)];
        }
    }

    const Layout& lay_;
    std::vector<std::size_t> partner_;
    Scratch scratch_;
};

}  // namespace

Topology genus_of(const StarSystem& system, const Gluing& gluing) {
    const Layout lay = layout_of(system);
    const std::size_t h = lay.color.size();
    if (gluing.partner.size() != h)
        throw ValidationError("gluing has " + std::to_string(gluing.partner.size()) + " entries for " +
                              std::to_string(h) + " half-edges");
    for (std::size_t x = 0; x < h; ++x) {
        const std::size_t y = gluing.partner[x];
        if (y >= h || y == x || gluing.partner[y] != x) throw ValidationError("gluing is not a perfect matching");
        if (lay.color[x] != lay.color[y]) throw ValidationError("gluing joins half-edges of different colors");
    }
    Scratch scratch;
    return topology(lay, gluing.partner, scratch);
}

BigInt MapCensus::connected(int genus) const {
    if (genus < 0 || static_cast<std::size_t>(genus) >= connected_by_genus.size()) return 0;
    return connected_by_genus[static_cast<std::size_t>(genus)];
}

MapCensus map_census(const StarSystem& system, const CountOptions& options) {
    if (options.max_half_edges > 32) throw ValidationError("half-edge cap above 32 is not supported");
    const std::size_t h = system.half_edges();
    if (h > options.max_half_edges)
        throw InfeasibleError("star system " + system.describe() + " has " + std::to_string(h) +
                              " half-edges, above the enumeration cap of " + std::to_string(options.max_half_edges) +
                              "; use the series solver instead");
    const Layout lay = layout_of(system);
    MapCensus census;
    if (!system.parity_ok()) return census;

    if (h == 0) {
        Scratch scratch;
        const Topology t = topology(lay, {}, scratch);
        census.total = 1;
        census.by_exponent[static_cast<int>(t.faces) - static_cast<int>(t.vertices)] = 1;
        // The empty system and a lone degree-0 star are both the sphere.
        if (t.components <= 1) census.connected_by_genus = {1};
        return census;
    }

    // Branch on the partner of half-edge 0.
    std::vector<std::size_t> branches;
    for (std::size_t y = 1; y < h; ++y)
        if (lay.color[y] == lay.color[0]) branches.push_back(y);
    std::vector<Tally> tallies(branches.size());
    parallel_for(branches.size(), [&](std::size_t b) {
        Enumerator e(lay);
        e.pin(0, branches[b]);
        e.run(tallies[b]);
    });

    for (const auto& t : tallies) {
        census.total += t.total;
        for (const auto& [e, c] : t.by_exponent) census.by_exponent[e] += c;
        if (census.connected_by_genus.size() < t.connected.size()) census.connected_by_genus.resize(t.connected.size());
        for (std::size_t g = 0; g < t.connected.size(); ++g) census.connected_by_genus[g] += t.connected[g];
    }
    return census;
}

BigInt count_maps(const StarSystem& system, int genus, const CountOptions& options) {
    return map_census(system, options).connected(genus);
}

Rational gaussian_genus_expansion(const StarSystem& system, long n, const CountOptions& options) {
    if (n < 1) throw ValidationError("matrix size must be positive");
    const MapCensus census = map_census(system, options);
    Rational sum = 0;
    for (const auto& [e, c] : census.by_exponent) {
        Rational term = c;
        BigInt power = boost::multiprecision::pow(BigInt(n), static_cast<unsigned>(std::abs(e)));
        if (e >= 0)
            term *= power;
        else
            term /= power;
        sum += term;
    }
    return sum;
}

}  // namespace freedyson
