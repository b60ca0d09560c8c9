#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "entspec/circuit.hpp"
#include "entspec/statevector.hpp"

namespace entspec {

// Real Pauli-string expansion of a Hermitian matrix: coefficients[i] =
// Tr[sigma_i rho] / 2^n over all 4^n strings. String index i is read two bits
// per qubit (qubit j's letter at bits 2j, 2j+1): 00=I, 01=X, 10=Y, 11=Z.
struct PauliDecomposition {
    int num_qubits = 0;
    Eigen::VectorXd coefficients;
};

// n <= 6; coefficient of the identity string is exactly trace/2^n.
PauliDecomposition pauli_decompose(const DensityMatrix& rho);

// Dense matrix of Pauli string `index` on num_qubits qubits.
Eigen::MatrixXcd pauli_matrix(int num_qubits, std::int64_t index);

// Sum of coefficients[i] * sigma_i; inverse of pauli_decompose.
DensityMatrix pauli_recompose(const PauliDecomposition& a);

// Truncation order K, evolution time t and the target bound epsilon with the
// invariant (e * |norm(rho) t| / (K+1))^{K+1} <= epsilon.
struct TaylorPlan {
    int K = 0;
    double t = 0.0;
    double epsilon = 0.0;
};

// Smallest K with (e * norm_rho_t / (K+1))^{K+1} <= epsilon; epsilon in (0,1).
int choose_K(double norm_rho_t, double epsilon);
TaylorPlan make_plan(double norm_rho_t, double t, double epsilon);

// A circuit fragment whose post-selected block realizes `scale` times a target
// operator (or state). `circuit` is the unitary part; `post` lists the
// (qubit, outcome) post-selections; `block_register` carries the result.
// `input_norm` corrects for feeding normalized register states where the
// bookkeeping is stated for unnormalized formal inputs: the formal block
// equals input_norm times the extracted one.
struct BlockCircuit {
    Circuit circuit{1};
    std::vector<int> block_register;
    std::vector<std::pair<int, int>> post;
    std::complex<double> scale{1.0, 0.0};
    double input_norm = 1.0;
};

// Prepares the coefficient state |A> = sum_i a_i |i> from a purification
// preparer: prep must satisfy prep|0...0> = c |xi>|0>_flag + |junk>|1>_flag
// with flag = prep qubit 0 and Tr_rest |xi><xi| = rho on xi's system register
// (the top n qubits of prep). The caller seeds |xi>|0>_flag on the preparer
// qubits; the circuit puts a uniform index register over Pauli strings above
// them, applies the index-controlled Pauli letters to the system register,
// then prep's adjoint; post-selecting the preparer block on zero leaves
// conj(c) * sum_i a_i |i> on the index register (formal proportionality
// conj(c) * 2^n under the recorded input_norm bookkeeping). Throws PrepError
// when prep violates its contract.
BlockCircuit encode_A(const Statevector& xi, const Circuit& prep, int system_qubits);

// The single-term selector: on (formal) input |A>|psi> with index register
// [n, 3n) above system [0, n), applying the index-controlled Pauli letters and
// then Hadamards on the index register leaves, on the index-zero block,
// (1/(2^n i t)) * (i rho t) acting on the system. scale = 1/(2^n i t).
BlockCircuit v_rho_t(const PauliDecomposition& a, double t);

// Unary-controlled Taylor selector on input |k>_unary |0>_rot |A>^{x K} |psi>.
// Registers (low to high): system [0,n), unary [n, n+K), rotation ancillas
// [n+K, n+2K), then K index registers of 2n qubits each. The post-selected
// block on unary value k equals scale * (i rho t)^k / k! with the common
// factor scale = (1/(2^n * i * t * beta))^K, beta = max(1, 1/|t|).
BlockCircuit v_taylor(const PauliDecomposition& a, double t, int K);

// (K+1)^{-1/2} sum_{k=0..K} |k> with |k> = 1^k 0^{K-k} across K qubits
// (qubits [0,k) set).
Circuit unary_superposition(int K);

// State preparation of a real amplitude vector (any signs) on the listed
// qubits via a tree of pattern-controlled RY rotations plus sign flips.
void append_real_state_prep(Circuit& c, const Eigen::VectorXd& amplitudes,
                            const std::vector<int>& qubits);

// Extracts the post-selected operator block of bc on its block register by
// column probing: runs the circuit once per basis input. Capped at 4 block
// qubits and the global qubit limit.
Eigen::MatrixXcd extract_block(const BlockCircuit& bc);

// Assembled truncated evolution: block = scale * sum_{k<=K} (i rho t)^k / k!.
// Divided by |scale| it approximates e^{i rho t} within plan.epsilon of
// operator norm (checked; TruncationError on failure). The circuit form
// (unary prep + v_taylor + Hadamards on the unary register) is materialized
// when it fits the qubit cap and n <= 4; the operator form composes the same
// per-stage blocks and factors directly.
struct AssembledExp {
    Eigen::MatrixXcd block;           // n-qubit matrix, scale included
    std::complex<double> scale;       // common post-selection factor
    TaylorPlan plan;
    double achieved_error = 0.0;      // |block/scale - e^{i rho t}| operator norm
    std::optional<BlockCircuit> circuit;  // present when circuit mode fits
};
AssembledExp assemble_exp(const PauliDecomposition& a, const TaylorPlan& plan,
                          bool force_operator_mode = false);

}  // namespace entspec
