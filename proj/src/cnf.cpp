#include "entspec/cnf.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace entspec {

void validate_formula(const CnfFormula& f, std::int64_t max_clauses) {
    if (f.num_vars < 1) throw ArgumentError("formula needs at least one variable");
    if (f.clauses.empty()) throw ArgumentError("formula needs at least one clause");
    if (max_clauses < 0) {
        const std::int64_t n = f.num_vars;
        max_clauses = n * n * n;
    }
    if (static_cast<std::int64_t>(f.clauses.size()) > max_clauses)
        throw ArgumentError("clause count exceeds the polynomial bound");
    for (const auto& clause : f.clauses)
        for (const Literal& lit : clause)
            if (lit.var < 0 || lit.var >= f.num_vars)
                throw ArgumentError("clause variable index out of range");
}

CnfFormula parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    CnfFormula f;
    bool header_seen = false;
    std::int64_t declared_clauses = 0;
    std::vector<int> pending;

    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;      // blank line
        if (tok == "c") continue;        // comment
        if (tok == "p") {
            std::string fmt;
            if (header_seen || !(ls >> fmt >> f.num_vars >> declared_clauses) || fmt != "cnf")
                throw FormatError("malformed DIMACS header");
            if (f.num_vars < 1 || declared_clauses < 1)
                throw FormatError("DIMACS header must declare at least one variable and clause");
            header_seen = true;
            continue;
        }
        if (!header_seen) throw FormatError("clause line before the DIMACS header");
        // literals may continue onto following lines until a terminating 0
        ls.clear();
        ls.str(line);
        int lit = 0;
        while (ls >> lit) {
            if (lit == 0) {
                if (pending.size() != 2)
                    throw FormatError("every clause must have exactly 2 literals, got " +
                                      std::to_string(pending.size()));
                std::array<Literal, 2> clause;
                for (int i = 0; i < 2; ++i) {
                    const int v = std::abs(pending[i]) - 1;
                    if (v >= f.num_vars) throw FormatError("literal names an undeclared variable");
                    clause[i] = Literal{v, pending[i] < 0};
                }
                f.clauses.push_back(clause);
                pending.clear();
            } else {
                pending.push_back(lit);
            }
        }
        if (ls.fail() && !ls.eof()) throw FormatError("non-integer token in a clause line");
    }
    if (!header_seen) throw FormatError("missing DIMACS header");
    if (!pending.empty()) throw FormatError("unterminated clause at end of input");
    if (declared_clauses != static_cast<std::int64_t>(f.clauses.size()))
        throw FormatError("clause count does not match the header");
    validate_formula(f);
    return f;
}

std::string to_dimacs(const CnfFormula& f) {
    std::ostringstream out;
    out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
    for (const auto& clause : f.clauses) {
        for (const Literal& lit : clause) out << (lit.negated ? -(lit.var + 1) : lit.var + 1) << ' ';
        out << "0\n";
    }
    return out.str();
}

namespace {

// true when assignment x (variable 1 = most significant bit) satisfies the clause
bool clause_satisfied(const CnfFormula& f, const std::array<Literal, 2>& clause, std::int64_t x) {
    for (const Literal& lit : clause) {
        const bool value = (x >> var_bit(f.num_vars, lit.var)) & 1;
        if (value != lit.negated) return true;
    }
    return false;
}

}  // namespace

std::int64_t brute_force_count(const CnfFormula& f) {
    validate_formula(f);
    if (f.num_vars > 24) throw ScaleError("brute-force counting is capped at 24 variables");
    std::int64_t count = 0;
    const std::int64_t dim = std::int64_t{1} << f.num_vars;
    for (std::int64_t x = 0; x < dim; ++x) {
        bool sat = true;
        for (const auto& clause : f.clauses)
            if (!clause_satisfied(f, clause, x)) {
                sat = false;
                break;
            }
        count += sat;
    }
    return count;
}

std::int64_t DiagonalHamiltonian::trace() const {
    std::int64_t t = 0;
    for (std::int64_t v : violations) t += v;
    return t;
}

DiagonalHamiltonian build_hamiltonian(const CnfFormula& f) {
    validate_formula(f);
    if (f.num_vars > 24) throw ScaleError("violation table is capped at 24 variables");
    DiagonalHamiltonian h;
    h.num_vars = f.num_vars;
    h.num_clauses = f.num_clauses();
    h.violations.assign(std::size_t{1} << f.num_vars, 0);

    for (const auto& clause : f.clauses) {
        const Literal &a = clause[0], &b = clause[1];
        if (a.var == b.var && a.negated != b.negated) continue;  // tautology: never violated
        // unique unsatisfying pattern: negated literal -> 1, plain -> 0
        std::int64_t mask = std::int64_t{1} << var_bit(f.num_vars, a.var);
        std::int64_t pattern = a.negated ? mask : 0;
        if (b.var != a.var) {
            const std::int64_t bbit = std::int64_t{1} << var_bit(f.num_vars, b.var);
            mask |= bbit;
            if (b.negated) pattern |= bbit;
        }
        const std::int64_t dim = std::int64_t{1} << f.num_vars;
        for (std::int64_t x = 0; x < dim; ++x)
            if ((x & mask) == pattern) ++h.violations[x];
    }
    return h;
}

DensityMatrix hamiltonian_to_density(const DiagonalHamiltonian& h) {
    if (h.num_vars > 11) throw ScaleError("dense density matrix is capped at 11 variables");
    const std::int64_t tr = h.trace();
    if (tr == 0)
        throw DegenerateError("every assignment satisfies the formula; the count is trivially 2^n = " +
                              std::to_string(std::int64_t{1} << h.num_vars));
    const std::int64_t dim = std::int64_t{1} << h.num_vars;
    DensityMatrix rho;
    rho.num_qubits = h.num_vars;
    rho.entries = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::int64_t x = 0; x < dim; ++x)
        rho.entries(x, x) = static_cast<double>(h.violations[x]) / static_cast<double>(tr);
    return rho;
}

std::string violations_csv(const DiagonalHamiltonian& h) {
    std::ostringstream out;
    out << "assignment,bitstring,violations\n";
    for (std::size_t x = 0; x < h.violations.size(); ++x) {
        out << x << ',';
        for (int b = h.num_vars - 1; b >= 0; --b) out << ((x >> b) & 1);
        out << ',' << h.violations[x] << '\n';
    }
    return out.str();
}

CnfFormula random_formula(int num_vars, int max_clauses, std::mt19937_64& rng) {
    if (num_vars < 2) throw ArgumentError("random formulas need at least 2 variables");
    if (max_clauses < 1) throw ArgumentError("max_clauses must be >= 1");
    // cap by the number of distinct clauses on distinct variables
    const std::int64_t distinct = std::int64_t{num_vars} * (num_vars - 1) / 2 * 4;
    const int target = static_cast<int>(
        std::uniform_int_distribution<int>(1, static_cast<int>(std::min<std::int64_t>(max_clauses, distinct)))(rng));

    CnfFormula f;
    f.num_vars = num_vars;
    std::set<std::tuple<int, int, bool, bool>> used;
    std::uniform_int_distribution<int> var_dist(0, num_vars - 1);
    std::uniform_int_distribution<int> bit(0, 1);
    while (static_cast<int>(f.clauses.size()) < target) {
        int i = var_dist(rng), j = var_dist(rng);
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        const bool ni = bit(rng), nj = bit(rng);
        if (!used.insert({i, j, ni, nj}).second) continue;
        f.clauses.push_back({Literal{i, ni}, Literal{j, nj}});
    }
    return f;
}

}  // namespace entspec
