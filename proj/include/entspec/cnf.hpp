#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "entspec/statevector.hpp"

namespace entspec {

struct Literal {
    int var = 0;         // 0-based variable index
    bool negated = false;
};

// Width-2 CNF formula. Clauses may repeat variables; (v, v) degenerates to a
// single-variable constraint and (v, !v) to a tautology.
struct CnfFormula {
    int num_vars = 0;
    std::vector<std::array<Literal, 2>> clauses;

    int num_clauses() const { return static_cast<int>(clauses.size()); }
};

// Assignment indices are read with variable 1 as the most significant bit, so
// the printed string x1 x2 ... xn equals the index in binary. Bit position of
// a 0-based variable inside an n-variable index:
inline int var_bit(int num_vars, int var) { return num_vars - 1 - var; }

// Throws ArgumentError unless variable indices are in range, every clause has
// width 2, 1 <= #C <= max_clauses (default n^3).
void validate_formula(const CnfFormula& f, std::int64_t max_clauses = -1);

// DIMACS CNF subset: width-2 clauses only. Negative literals set the negated
// flag; variables become 0-based.
CnfFormula parse_dimacs(const std::string& text);
std::string to_dimacs(const CnfFormula& f);

// Exact satisfying-assignment count by enumeration; n <= 24.
std::int64_t brute_force_count(const CnfFormula& f);

// Diagonal clause-violation-count operator: violations[x] = number of clauses
// assignment x leaves unsatisfied. Integer arithmetic throughout.
struct DiagonalHamiltonian {
    int num_vars = 0;
    int num_clauses = 0;
    std::vector<std::int64_t> violations;

    std::int64_t trace() const;
};

// Each clause penalizes exactly its unique unsatisfying local pattern
// (negated literal -> bit 1, plain literal -> bit 0); tautological clauses
// contribute nothing.
DiagonalHamiltonian build_hamiltonian(const CnfFormula& f);

// rho = H / Tr(H), a diagonal density matrix. Throws DegenerateError when
// Tr(H) = 0 (every assignment satisfies the formula, the count is trivially
// 2^n); throws ScaleError when the dense matrix would be unreasonably large.
DensityMatrix hamiltonian_to_density(const DiagonalHamiltonian& h);

// CSV export, columns: assignment,bitstring,violations.
std::string violations_csv(const DiagonalHamiltonian& h);

// Random formula with distinct variables per clause and no repeated clause.
// Clause count is drawn uniformly from [1, max_clauses].
CnfFormula random_formula(int num_vars, int max_clauses, std::mt19937_64& rng);

}  // namespace entspec
