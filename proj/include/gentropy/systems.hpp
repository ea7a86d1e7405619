#pragma once

// Level-n cylinder profiles of the three system families: Bernoulli shifts
// (type-class enumeration), Sturmian shifts (three-distance arc lengths),
// and the standard-example subshift with block counts b_n = 2^(2^n) driven
// by a repetition sequence (r_n).

#include <string>
#include <vector>

#include "gentropy/gfun.hpp"
#include "gentropy/measure.hpp"

namespace gentropy {

struct BernoulliSystem {
    std::vector<double> p;

    explicit BernoulliSystem(std::vector<double> probs);
    int k() const { return static_cast<int>(p.size()); }
    double shannon_entropy() const; // -sum p_i ln p_i
    // The m-step power of the shift is Bernoulli on k^m symbols.
    BernoulliSystem blocked(int m) const;
    std::string describe() const;
};

// Distribution of all k^n cylinder measures grouped by type class; exact
// multinomial multiplicities for n <= 1000, log2-encoded above.
CylinderDistribution bernoulli_distribution(const BernoulliSystem& sys, long n,
                                            std::size_t max_atoms = 10'000'000);

struct SturmianSystem {
    double beta = 0.0;
    std::string beta_spec; // provenance: "golden", decimal, or cf:...

    static SturmianSystem golden();
    static SturmianSystem from_decimal(double beta);
    static SturmianSystem from_continued_fraction(const std::vector<long>& cf);
    std::string describe() const;
};

// Exactly n+1 arcs of the circle partition from the orbit points
// {j*beta mod 1 : j = -(n-1)..1}; multiplicity-1 atoms.
CylinderDistribution sturmian_distribution(const SturmianSystem& sys, long n);

struct StageRecord {
    int N = 0;            // N_m
    double log2_R = 0.0;  // log2 of R_m
    double gamma_at_N = 0.0;
    double sigma1 = 0.0, sigma2 = 0.0; // admissible window for R_m (linear when small)
    bool window_ok = false;
};

// The sequences of the standard-example construction, in log2 encoding
// (b_6 = 2^64 already leaves native integers). k is fixed at 2.
class ConstructionState {
public:
    static ConstructionState trivial(int max_stage);     // r == 1 throughout
    static ConstructionState from_r_log2(std::vector<double> log2_r, int max_stage);

    int k() const { return 2; }
    double target_gamma() const { return target_gamma_; }
    const std::vector<StageRecord>& stage_records() const { return stages_; }
    const std::vector<double>& log2_r() const { return log2_r_; }

    int max_stage() const { return max_stage_; }
    double log2_b(int n) const;  // log2 b_n = 2^n
    double log2_h(int n) const;  // block length h_n
    double log2_D(int n) const;  // determining prefix D_n = sum_{i<n} h_i
    double log2_S(int n) const;  // sum_{i=1..n} h_i (gamma denominator)
    // Determining length of a stage-n block in the count model (D_n + 1).
    double log2_det_len(int n) const;
    // Doubling positions of stage n relative to h_{n-1} (log2 of the offsets).
    const std::vector<double>& reveal_steps_log2(int level) const;

    std::string to_json() const;

    friend ConstructionState build_r_for_target(const GFunction& g, double gamma,
                                                int stages, long horizon);

private:
    ConstructionState() = default;
    void materialize(int max_stage);

    double target_gamma_ = 1.0;
    int max_stage_ = 0;
    std::vector<double> log2_r_;
    std::vector<StageRecord> stages_;
    std::vector<double> log2_h_, log2_S_, log2_D_;
    std::vector<std::vector<double>> steps_;
};

// Count N(m) of positive-measure m-cylinders and the common cell measure,
// as (log2_count, log2_prob); m is passed as log2 because determining
// lengths grow beyond any integer range.
std::pair<double, double> standard_count_profile(const ConstructionState& st, double log2_m);
std::pair<double, double> standard_count_profile(const ConstructionState& st, long m);

// Level-m cylinder profile of the standard example (uniform on N(m) cells).
CylinderDistribution standard_distribution(const ConstructionState& st, double log2_m);

// xi_j = phi_g(2^-(2^(n-1)+j)) / b_j^(n) for j = 1..2^(n-1).
std::vector<double> xi_sequence(const ConstructionState& st, const GFunction& g, int n);

// gamma_n = 2^(n+1) a_n / (2 r_0 + ... + 2^n r_0...r_{n-1}) with
// a_n = phi_g(2^-2^(n+1)) / 2^(n+1).
std::vector<double> gamma_sequence(const ConstructionState& st, const GFunction& g,
                                   int n_max);

// Inductive selection of (r_n) so that limsup gamma_n = gamma: each stage m
// picks N_m satisfying the integer-part inequality and the admissibility
// window, then sets r_{N_{m-1}+1} = R_m. Requires U(2) > 1 (strictly, with
// margin) and g in G0_infinity.
ConstructionState build_r_for_target(const GFunction& g, double gamma, int stages,
                                     long horizon = 1'000'000);

} // namespace gentropy
