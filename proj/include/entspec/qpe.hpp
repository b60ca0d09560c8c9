#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "entspec/circuit.hpp"
#include "entspec/cnf.hpp"
#include "entspec/spectrum.hpp"

namespace entspec {

// Backend used for the controlled evolutions inside phase estimation:
//  - exact_diagonal: diagonal phase gates; clause-factorized for CNF operators
//    (any width), a single diagonal gate otherwise (<= 3 qubits).
//  - exact_expm: dense matrix exponential as one controlled gate (<= 3 qubits).
//  - lcu_taylor: the truncated-Taylor block encoding of e^{+i rho t}, polar-
//    projected onto the nearest unitary (<= 3 qubits).
enum class EvolutionMode { exact_diagonal, exact_expm, lcu_taylor };

// One operator in exactly one representation, with a recorded spectral range.
// Spectra must be PSD within 1e-10 (the phase window starts at 0). The CNF
// form keeps the source formula because the clause-factorized evolution needs
// the per-clause unsatisfying patterns, not just the violation counts.
struct HamiltonianHandle {
    int num_qubits = 0;
    std::optional<CnfFormula> formula;        // clause list (CNF form only)
    std::optional<DiagonalHamiltonian> cnf;   // integer clause-violation diagonal
    std::optional<Eigen::VectorXd> diagonal;  // generic real diagonal
    std::optional<Eigen::MatrixXcd> dense;    // Hermitian matrix
    double lambda_max = 0.0;                  // largest eigenvalue (exact or bound)

    static HamiltonianHandle from_cnf(const CnfFormula& f);
    static HamiltonianHandle from_diagonal(Eigen::VectorXd diag);
    static HamiltonianHandle from_dense(Eigen::MatrixXcd h);

    bool integer_spectrum() const;
};

struct PhaseEstimationConfig {
    int d_t = 2;             // phase register bits
    int r = 1;               // concatenation repetitions, odd
    double threshold_b = 0.5;  // counting threshold in eigenvalue units
    EvolutionMode evolution = EvolutionMode::exact_diagonal;
    double scale = 0.0;      // 0 = auto; else eigenvalue->phase factor s
    double lcu_epsilon = 1e-10;  // truncation target for lcu_taylor powers
};

// Eigenvalue->phase factor s such that every eigenvalue maps to the bin
// g = s * lambda * 2^d_t inside [0, 2^d_t - 1]. Integer spectra get s = 2^-d_t
// (bins land exactly on integers); others get s = (D-1)/(D * lambda_max).
// Throws RangeError when the spectrum cannot fit the window.
double resolve_scale(const HamiltonianHandle& h, const PhaseEstimationConfig& cfg);

// Discrete Fourier transform on the listed qubits (reg[0] = least significant
// bit of the register value): |j> -> 2^{-d/2} sum_k exp(+2 pi i j k / 2^d) |k>,
// or the inverse.
void append_qft(Circuit& c, const std::vector<int>& reg, bool inverse);

// Standard phase-estimation circuit on n + d_t qubits: system [0,n), phase
// register [n, n+d_t). Controlled evolutions use angle 2*pi*s*2^m on phase bit
// m; the Fourier transform direction is chosen per mode so the measured bin is
// always g = s * lambda * 2^d_t.
Circuit phase_estimation_circuit(const HamiltonianHandle& h, const PhaseEstimationConfig& cfg);

// r independent phase-estimation rounds sharing the system register: system
// [0,n), round j's phase register [n + j*d_t, n + (j+1)*d_t).
Circuit concatenated_pe(const HamiltonianHandle& h, const PhaseEstimationConfig& cfg);

// Reversible threshold comparator on d_t + 1 qubits: value register [0, d_t),
// result ancilla d_t. Flips the ancilla for every grid value k with
// k/2^d_t > b. Throws TieError when b*2^d_t is an integer (within 1e-9).
Circuit threshold_oracle(int d_t, double b);

// Register map of the full counting pipeline (low to high): copy [0,n),
// system [n,2n), r phase registers, r threshold ancillas, majority ancilla.
struct PipelineLayout {
    int n = 0;
    int d_t = 0;
    int r = 0;
    std::vector<int> copy_reg;
    std::vector<int> system_reg;
    std::vector<std::vector<int>> phase_regs;
    std::vector<int> f_reg;
    int maj = 0;
    int total = 0;
};
PipelineLayout pipeline_layout(int n, const PhaseEstimationConfig& cfg);

struct PipelineOptions {
    bool skip_uncompute = false;  // mutation knob: drop the oracle uncompute
};

struct PipelineResult {
    double uev = 0.0;
    std::int64_t rounded = 0;
    double scale = 0.0;
    PipelineLayout layout;
};

// Raw unnormalized-expectation readout of the full pipeline: unnormalized
// maximally entangled input (amplitude 1 on every (s, s) pair, so branches
// count directly), r phase-estimation rounds, threshold oracles, majority
// vote, oracle uncompute, inverse rounds, then the UEV of the projector onto
// (majority = 0, all phase and threshold ancillas = 0). With an on-grid
// spectrum the readout equals the number of eigenvalues <= b exactly.
// Validates the promise against the exact spectrum first.
double pipeline_uev(const HamiltonianHandle& h, const CountPromise& p,
                    const PhaseEstimationConfig& cfg, const PipelineOptions& opts = {});

// pipeline_uev plus rounding; |uev - nearest integer| >= 0.25 raises
// ConfidenceError.
PipelineResult run_counting_pipeline(const HamiltonianHandle& h, const CountPromise& p,
                                     const PhaseEstimationConfig& cfg,
                                     const PipelineOptions& opts = {});

// The rounded count alone.
std::int64_t counting_pipeline(const HamiltonianHandle& h, const CountPromise& p,
                               const PhaseEstimationConfig& cfg);

}  // namespace entspec
