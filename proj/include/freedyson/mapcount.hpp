#pragma once

// Exhaustive enumeration of colored maps obtained by gluing labeled stars.
//
// A star of type q = X_{i1}···X_{ip} has p half-edges in cyclic order, the
// first one distinguished, half-edge t carrying color i_t. A gluing is a
// color-respecting perfect matching of all half-edges; its faces are the
// cycles of σ∘α (σ = rotation around each star, α = the matching) and its
// genus follows from V − E + F = 2·(#components) − 2g.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "freedyson/ncpoly.hpp"

namespace freedyson {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct Star {
    Word type;
    int label = 0;
};

struct StarSystem {
    int letters = 1;
    /// (q_j, k_j): k_j labeled stars of type q_j.
    std::vector<std::pair<Word, int>> stars;
    /// One extra star of type P, when present.
    std::optional<Word> observable;

    /// Labeled stars: the q_j copies in order, then the observable.
    std::vector<Star> expand() const;
    std::size_t half_edges() const;
    /// Every color appears an even number of times (else all counts vanish).
    bool parity_ok() const;
    std::string describe() const;
};

/// Parses "x4:2,X1X2X1X2:1" into (type, multiplicity) pairs.
std::vector<std::pair<Word, int>> parse_star_list(std::string_view text, int letters = 0);

struct Gluing {
    /// partner[h] is the half-edge glued to h; half-edges are numbered star by
    /// star in StarSystem::expand() order.
    std::vector<std::size_t> partner;
};

struct Topology {
    std::size_t vertices = 0;
    std::size_t edges = 0;
    std::size_t faces = 0;
    std::size_t components = 0;
    /// Sum of the genera of the components.
    int genus = 0;
    bool connected = true;
};

Topology genus_of(const StarSystem& system, const Gluing& gluing);

struct CountOptions {
    /// Enumeration refuses systems with more half-edges than this.
    std::size_t max_half_edges = 16;
};

struct MapCensus {
    /// Connected gluings by genus.
    std::vector<BigInt> connected_by_genus;
    /// All gluings (connected or not) keyed by F − E − V, the exponent of N in
    /// E[∏ (1/N) Tr q(H)] for a GUE matrix with E|H_ij|² = 1/N.
    std::map<int, BigInt> by_exponent;
    BigInt total;

    BigInt connected(int genus) const;
};

MapCensus map_census(const StarSystem& system, const CountOptions& options = {});

/// M_g: connected gluings of genus g.
BigInt count_maps(const StarSystem& system, int genus, const CountOptions& options = {});

/// Σ over all gluings of N^{F−E−V} = E[∏_stars (1/N) Tr q(H)] exactly.
Rational gaussian_genus_expansion(const StarSystem& system, long n, const CountOptions& options = {});

}  // namespace freedyson
