#pragma once

// Measure profiles of finite partitions. A CylinderDistribution records the
// multiset of cell measures of a refinement level as (log2 probability,
// multiplicity) atoms. Multiplicities are exact big integers where that is
// affordable (Bernoulli type classes up to n = 1000) and log2-encoded where
// counts like 2^(2^n) leave any integer budget.

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "gentropy/gfun.hpp"
#include "gentropy/logdomain.hpp"

namespace gentropy {

struct LogProb {
    double log2_p = 0.0;                        // <= 0
    std::optional<long> exact_dyadic;           // p = 2^-e exactly when present

    static LogProb from_log2(double l);
    static LogProb dyadic(long e);              // p = 2^-e
};

// Exactly one encoding is authoritative per value.
class Multiplicity {
public:
    static Multiplicity exact(mpz_class v);
    static Multiplicity exact(unsigned long v);
    static Multiplicity from_log2(double l);

    bool is_exact() const { return exact_.has_value(); }
    const mpz_class& exact_value() const;
    double log2_value() const; // derived from the exact value when present

    Multiplicity operator*(const Multiplicity& o) const;
    Multiplicity operator+(const Multiplicity& o) const;

private:
    std::optional<mpz_class> exact_;
    double log2_ = 0.0;
};

struct Atom {
    LogProb prob;
    Multiplicity mult;
};

class CylinderDistribution {
public:
    // Validates the unit-mass invariant, merges atoms whose log2_p coincide
    // within 1e-15 relative, and sorts atoms by log2_p.
    CylinderDistribution(std::vector<Atom> atoms, long level);

    static CylinderDistribution point_mass();
    static CylinderDistribution uniform(unsigned long cells, long level);
    // Uniform over 2^log2_count cells of measure 2^-log2_count each.
    static CylinderDistribution uniform_log2(double log2_count, long level);
    static CylinderDistribution from_masses(const std::vector<double>& masses, long level = 0);

    const std::vector<Atom>& atoms() const { return atoms_; }
    long level() const { return level_; }
    double log2_total_cells() const { return log2_total_cells_; }
    double log2_mass() const; // should be ~0

    std::string to_json() const;

private:
    std::vector<Atom> atoms_;
    long level_ = 0;
    double log2_total_cells_ = 0.0;
};

// H(g, P) = sum over cells of g(cell measure), in nats for g built on ln.
double static_entropy(const GFunction& g, const CylinderDistribution& d);

// Join of independent measure profiles: pairwise products of atoms.
CylinderDistribution product(const CylinderDistribution& a, const CylinderDistribution& b,
                             std::size_t max_atoms = 10'000'000);

// Partition pseudometric d(P,Q) = min over permutations of
// sum_i mu(A_i symdiff B_pi(i)), on a common finite refinement.
// cell_mass[c] is the measure of refinement cell c; class_p/class_q assign
// each cell to a class index in [0, m). Exact optimal assignment; m <= 64.
double partition_distance(const std::vector<double>& cell_mass,
                          const std::vector<int>& class_p,
                          const std::vector<int>& class_q, int m);

} // namespace gentropy
