#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "entspec/circuit.hpp"
#include "entspec/cnf.hpp"
#include "entspec/spectrum.hpp"
#include "entspec/statevector.hpp"

namespace entspec {

// Qubit map of the purification state |xi> = a sum_s |s>|s> sum_{k viol} |k>.
// Low to high: evaluation flag, unary clause register, copy register, variable
// register. Variable i (0-based) sits on s[n-1-i] so the register read high to
// low spells x1 x2 ... xn, matching assignment indices.
struct PurificationLayout {
    int n = 0;             // variables
    int num_clause_qubits = 0;  // #C, unary
    int flag = 0;          // qubit 0
    std::vector<int> k_reg;     // [1, 1+#C)
    std::vector<int> s_copy;    // [1+#C, 1+#C+n)
    std::vector<int> s_reg;     // [1+#C+n, 1+#C+2n)
    int total = 0;         // 2n + #C + 1
    double a = 0.0;        // 1/sqrt(Tr H)

    int var_qubit(int var) const { return s_reg[n - 1 - var]; }
    int var_copy_qubit(int var) const { return s_copy[n - 1 - var]; }
};
PurificationLayout purification_layout(const CnfFormula& f);

// U with U|0...0> = (1/2)|xi>|0>_flag + (sqrt3/2)|junk>|1>_flag exactly:
// Hadamards + copy CNOTs, the unary clause-register stair, then the telescoped
// clause evaluation into the flag.
Circuit build_purification_circuit(const CnfFormula& f);

// One Grover step U_xi = U * S0 * U^dag * Z_flag * U: Z on the flag (qubit 0)
// reflects about the flag-0 branch, U S0 U^dag reflects about the prepared
// state, with S0 negating |0...0> (X sandwich around a multi-controlled Z).
// The step rotates the branch plane by twice the preparation angle, so an
// input flag-0 amplitude of exactly sin(theta) = 1/2 lands on +|xi>|0> with
// amplitude sin(3 theta) = 1. The input amplitude is measured by simulation; a
// deviation beyond 1e-9 raises AmplitudeError.
//
// oblivious_amplify reflects over every qubit (exact for any preparer meeting
// the contract); the CNF variant amplifies build_purification_circuit(f) and
// reflects over the (k, s) registers only, which that circuit's structure
// makes equivalent and which compiles to far fewer elementary gates.
Circuit oblivious_amplify(const Circuit& u);
Circuit oblivious_amplify_cnf(const CnfFormula& f);

// Lowers a projection-free circuit to gates acting on at most two qubits
// (multi-controlled gates via the recursive controlled square-root identity).
std::vector<Gate> compile_two_qubit(const Circuit& c);

// Full gate list and register map of the history construction. System
// register, low to high: the purification block (2n+#C+1 qubits as in
// PurificationLayout), the receiving EPR halves e[0..n), the kept EPR halves
// h[0..n), and the output flag. Gates: the compiled U_xi (T0 gates), n SWAPs
// moving variable register qubit m onto e[m], and a final X on the output
// flag. The spectral cut is e + flag_out (n+1 qubits).
struct HistoryLayout {
    CnfFormula formula;
    PurificationLayout purif;
    std::vector<int> e_reg;   // receiving EPR halves
    std::vector<int> h_reg;   // kept EPR halves
    int flag_out = 0;
    int n_sys = 0;            // 4n + #C + 2
    int T0 = 0;               // compiled gate count of U_xi
    int T = 0;                // T0 + n + 1
    std::vector<Gate> gates;  // U_1 ... U_T, each on <= 2 qubits

    std::vector<int> cut() const;  // e_reg + flag_out
};
HistoryLayout build_history_layout(const CnfFormula& f);

// History state in clock sectors: sectors[t] = (T+1)^{-1/2} U_t...U_1 |alpha>
// over the system register, t = 0..T; the clock register is implicitly the
// legal unary basis. |alpha> = |0...0>_purif (x) EPR pairs on (e[m], h[m]) (x)
// |1>_flag_out.
struct HistoryState {
    int n_sys = 0;
    int T = 0;
    std::vector<Eigen::VectorXcd> sectors;

    double squared_norm() const;
    // Dense vector over n_sys + T qubits (clock above the system register,
    // clock qubit t-1 at index n_sys + t - 1); guarded by the qubit cap.
    Statevector to_statevector() const;
};
HistoryState build_history_state(const HistoryLayout& layout);
HistoryState make_history_state(const std::vector<Gate>& gates, const Statevector& alpha);

// One >=0 local term of the clock Hamiltonian. Support lists the qubits
// (global indices, support[0] = least significant bit of op's index); every
// support has at most 5 qubits.
struct LocalTerm {
    std::string label;
    std::vector<int> support;
    Eigen::MatrixXcd op;
};

// H' = H_in + H_out + sum_t H_prop(t) + H_clock over n_sys system qubits and
// T unary clock qubits (clock qubit t-1 of |t> at global index n_sys + t - 1).
struct HistoryHamiltonian {
    int n_sys = 0;
    int T = 0;
    std::vector<Gate> gates;           // U_1 ... U_T (<= 2-qubit supports)
    std::vector<LocalTerm> in_terms;   // system-register part of H_in
    std::vector<LocalTerm> out_terms;  // system-register part of H_out
    std::vector<LocalTerm> terms;      // all terms with clock projectors attached

    std::int64_t legal_dim() const;
    int total_qubits() const { return n_sys + T; }
};

// Core builder from an arbitrary gate list (used by the CNF wrapper and by the
// dense cross-check toys). in_terms/out_terms act on the system register and
// are attached to the t=0 / t=T clock projectors respectively.
HistoryHamiltonian make_history_hamiltonian(const std::vector<Gate>& gates, int n_sys,
                                            std::vector<LocalTerm> in_terms,
                                            std::vector<LocalTerm> out_terms);

// The clause-violation instance: H_in penalizes |1> on every purification
// input qubit, the EPR defect (I - |E><E|) on every pair, and |0> on the
// output flag; H_out penalizes |1> on the output flag at t = T.
HistoryHamiltonian build_history_hamiltonian(const CnfFormula& f);
HistoryHamiltonian build_history_hamiltonian(const HistoryLayout& layout);

// Action on the legal (unary-clock) block, represented like HistoryState
// sectors. Used by the Lanczos gap analysis and validated against the dense
// assembly on toy instances.
void apply_legal_block(const HistoryHamiltonian& hh, const std::vector<Eigen::VectorXcd>& in,
                       std::vector<Eigen::VectorXcd>& out);

// Dense 2^(n_sys+T) assembly for toy instances (guarded by the qubit cap).
Eigen::MatrixXcd assemble_dense(const HistoryHamiltonian& hh);

// <state|H'|state> for a legal-block state (exact; zero for the ground state
// up to roundoff).
double ground_energy(const HistoryHamiltonian& hh, const HistoryState& state);

struct GapReport {
    double theta = 0.0;      // smallest Ritz value orthogonal to the ground state
    double residual = 0.0;   // Lanczos residual norm: an eigenvalue lies in theta +- residual
    int iterations = 0;
    bool converged = false;

    double certified_lower() const { return theta - residual; }
};

struct LanczosOptions {
    int max_iterations = 450;
    double residual_factor = 0.02;  // stop at residual <= factor * theta
    std::uint64_t seed = 0x5eed;
};

// Spectral gap above the (known, deflated) ground state on the legal block.
// The illegal block never falls below 1, so this is the gap of the full H'.
GapReport spectral_gap(const HistoryHamiltonian& hh, const HistoryState& ground,
                       const LanczosOptions& opts = {});

// Reduced state of clock sector t on the spectral cut, and the per-t spectral
// report rows.
struct SectorReport {
    int t = 0;
    double max_eig = 0.0;
    double min_nonzero_eig = 0.0;
};

// tau = weight * rho (x) |0><0| + (1 - weight) * rho' (x) |1><1| on the cut,
// with rho the formula's density matrix carried by the receiving EPR halves at
// t = T and rho' the average of the earlier sectors (flag still |1>).
struct TauDecomposition {
    DensityMatrix rho;        // n qubits
    DensityMatrix rho_prime;  // n qubits
    double weight = 0.0;      // 1/(T+1)
    DensityMatrix tau;        // n+1 qubits (cut), as traced from the history state
    double residual = 0.0;    // max-norm defect of the decomposition identity
};

struct IntermediateSpectra {
    std::vector<SectorReport> per_t;
    TauDecomposition tau;
};
IntermediateSpectra intermediate_spectra(const HistoryLayout& layout, const HistoryState& state);

// CSV export, columns: t,max_eig,min_nonzero_eig.
std::string per_t_csv(const std::vector<SectorReport>& rows);

}  // namespace entspec
