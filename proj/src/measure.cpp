#include "gentropy/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gentropy/errors.hpp"

namespace gentropy {

LogProb LogProb::from_log2(double l) {
    if (l > 1e-12) throw SpecError("LogProb: log2_p must be <= 0, got " + std::to_string(l));
    return LogProb{std::min(l, 0.0), std::nullopt};
}

LogProb LogProb::dyadic(long e) {
    if (e < 0) throw SpecError("LogProb::dyadic: exponent must be >= 0");
    return LogProb{-static_cast<double>(e), e};
}

Multiplicity Multiplicity::exact(mpz_class v) {
    if (v < 0) throw SpecError("Multiplicity: negative count");
    Multiplicity m;
    m.exact_ = std::move(v);
    m.log2_ = m.log2_value();
    return m;
}

Multiplicity Multiplicity::exact(unsigned long v) { return exact(mpz_class(v)); }

Multiplicity Multiplicity::from_log2(double l) {
    Multiplicity m;
    m.log2_ = l;
    return m;
}

const mpz_class& Multiplicity::exact_value() const {
    if (!exact_) throw EvalError("Multiplicity: exact value requested from log2 encoding");
    return *exact_;
}

double Multiplicity::log2_value() const {
    if (!exact_) return log2_;
    if (*exact_ == 0) return neg_inf();
    long exp = 0;
    const double mant = mpz_get_d_2exp(&exp, exact_->get_mpz_t());
    return std::log2(mant) + static_cast<double>(exp);
}

Multiplicity Multiplicity::operator*(const Multiplicity& o) const {
    if (exact_ && o.exact_) return exact(mpz_class(*exact_ * *o.exact_));
    return from_log2(log2_value() + o.log2_value());
}

Multiplicity Multiplicity::operator+(const Multiplicity& o) const {
    if (exact_ && o.exact_) return exact(mpz_class(*exact_ + *o.exact_));
    return from_log2(logsumexp2(log2_value(), o.log2_value()));
}

namespace {

// Atoms with log2_p equal to 1e-15 relative tolerance are the same cell
// measure up to floating-point jitter.
bool same_prob(double a, double b) {
    return std::abs(a - b) <= 1e-15 * std::max({std::abs(a), std::abs(b), 1.0});
}

} // namespace

CylinderDistribution::CylinderDistribution(std::vector<Atom> atoms, long level)
    : level_(level) {
    if (atoms.empty()) throw SpecError("CylinderDistribution: no atoms");
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.prob.log2_p < b.prob.log2_p; });

    for (auto& a : atoms) {
        if (a.prob.log2_p > 1e-12)
            throw SpecError("CylinderDistribution: atom with positive log2_p");
        if (a.mult.log2_value() < 0.0 && !a.mult.is_exact())
            throw SpecError("CylinderDistribution: multiplicity below 1");
        if (a.mult.is_exact() && a.mult.exact_value() < 1)
            throw SpecError("CylinderDistribution: multiplicity below 1");
        if (atoms_.empty() || !same_prob(atoms_.back().prob.log2_p, a.prob.log2_p)) {
            atoms_.push_back(std::move(a));
        } else {
            Atom& last = atoms_.back();
            last.mult = last.mult + a.mult;
            if (!(last.prob.exact_dyadic && a.prob.exact_dyadic &&
                  *last.prob.exact_dyadic == *a.prob.exact_dyadic))
                last.prob.exact_dyadic.reset();
        }
    }

    double cells = neg_inf();
    for (const auto& a : atoms_) cells = logsumexp2(cells, a.mult.log2_value());
    log2_total_cells_ = cells;

    const double mass = std::exp2(log2_mass());
    if (!(std::abs(mass - 1.0) <= 1e-9))
        throw SpecError("CylinderDistribution: total mass " + std::to_string(mass) +
                        " violates the unit-mass invariant");
}

double CylinderDistribution::log2_mass() const {
    std::vector<double> terms;
    terms.reserve(atoms_.size());
    for (const auto& a : atoms_) terms.push_back(a.mult.log2_value() + a.prob.log2_p);
    return logsumexp2(terms);
}

CylinderDistribution CylinderDistribution::point_mass() {
    return CylinderDistribution({Atom{LogProb::dyadic(0), Multiplicity::exact(1ul)}}, 0);
}

CylinderDistribution CylinderDistribution::uniform(unsigned long cells, long level) {
    if (cells == 0) throw SpecError("uniform: needs at least one cell");
    return CylinderDistribution(
        {Atom{LogProb::from_log2(-std::log2(static_cast<double>(cells))),
              Multiplicity::exact(cells)}},
        level);
}

CylinderDistribution CylinderDistribution::uniform_log2(double log2_count, long level) {
    return CylinderDistribution(
        {Atom{LogProb::from_log2(-log2_count), Multiplicity::from_log2(log2_count)}}, level);
}

CylinderDistribution CylinderDistribution::from_masses(const std::vector<double>& masses,
                                                       long level) {
    std::vector<Atom> atoms;
    atoms.reserve(masses.size());
    for (double m : masses) {
        if (m < 0.0) throw SpecError("from_masses: negative mass");
        if (m == 0.0) continue; // null cells carry no entropy
        atoms.push_back(Atom{LogProb::from_log2(std::log2(m)), Multiplicity::exact(1ul)});
    }
    return CylinderDistribution(std::move(atoms), level);
}

std::string CylinderDistribution::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"level\":" << level_ << ",\"atoms\":[";
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const auto& a = atoms_[i];
        if (i) os << ",";
        os << "{\"log2_p\":" << a.prob.log2_p;
        if (a.mult.is_exact()) {
            const mpz_class& v = a.mult.exact_value();
            if (v <= mpz_class("9007199254740992"))
                os << ",\"multiplicity\":" << v.get_str();
            else
                os << ",\"multiplicity\":\"" << v.get_str() << "\"";
        } else {
            os << ",\"log2_multiplicity\":" << a.mult.log2_value();
        }
        os << "}";
    }
    os << "],\"log2_total_cells\":" << log2_total_cells_ << "}";
    return os.str();
}

double static_entropy(const GFunction& g, const CylinderDistribution& d) {
    std::vector<double> terms;
    terms.reserve(d.atoms().size());
    for (const auto& a : d.atoms()) {
        const double lp = a.prob.log2_p;
        const double lm = a.mult.log2_value();
        if (lp < -900.0 && !g.has_log_form())
            throw EvalError("static_entropy: " + g.name() +
                            " lacks a log-domain form for cells at log2_p=" +
                            std::to_string(lp));
        if (lp >= -900.0 && lm <= 900.0) {
            // Representable range: evaluate linearly (captures g < 0 too).
            double mult = a.mult.is_exact() ? a.mult.exact_value().get_d() : std::exp2(lm);
            terms.push_back(mult * g.eval(std::exp2(lp)));
        } else {
            terms.push_back(std::exp2(lm + g.log2_eval(lp)));
        }
    }
    return stable_sum(std::move(terms));
}

CylinderDistribution product(const CylinderDistribution& a, const CylinderDistribution& b,
                             std::size_t max_atoms) {
    const std::size_t count = a.atoms().size() * b.atoms().size();
    if (count > max_atoms)
        throw SpecError("product: atom count " + std::to_string(count) +
                        " exceeds the cap " + std::to_string(max_atoms) +
                        "; use the type-class path instead");
    std::vector<Atom> atoms;
    atoms.reserve(count);
    for (const auto& x : a.atoms()) {
        for (const auto& y : b.atoms()) {
            LogProb p = LogProb::from_log2(x.prob.log2_p + y.prob.log2_p);
            if (x.prob.exact_dyadic && y.prob.exact_dyadic)
                p = LogProb::dyadic(*x.prob.exact_dyadic + *y.prob.exact_dyadic);
            atoms.push_back(Atom{p, x.mult * y.mult});
        }
    }
    return CylinderDistribution(std::move(atoms), a.level() + b.level());
}

namespace {

// Exact minimum-cost perfect assignment on an n x n matrix (Hungarian
// algorithm with potentials, O(n^3)).
double assignment_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double INF = pos_inf();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, INF);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = INF;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) total += cost[match[j] - 1][j - 1];
    return total;
}

} // namespace

double partition_distance(const std::vector<double>& cell_mass,
                          const std::vector<int>& class_p,
                          const std::vector<int>& class_q, int m) {
    if (m < 1) throw SpecError("partition_distance: m must be >= 1");
    if (m > 64)
        throw SpecError("partition_distance: exact assignment limited to m <= 64");
    if (class_p.size() != cell_mass.size() || class_q.size() != cell_mass.size())
        throw SpecError("partition_distance: inconsistent refinement spaces");

    std::vector<double> mass_p(m, 0.0), mass_q(m, 0.0);
    std::vector<std::vector<double>> joint(m, std::vector<double>(m, 0.0));
    for (std::size_t c = 0; c < cell_mass.size(); ++c) {
        const int i = class_p[c], j = class_q[c];
        if (i < 0 || i >= m || j < 0 || j >= m)
            throw SpecError("partition_distance: class index outside [0,m)");
        mass_p[i] += cell_mass[c];
        mass_q[j] += cell_mass[c];
        joint[i][j] += cell_mass[c];
    }

    std::vector<std::vector<double>> cost(m, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            cost[i][j] = mass_p[i] + mass_q[j] - 2.0 * joint[i][j];
    return assignment_cost(cost);
}

} // namespace gentropy
