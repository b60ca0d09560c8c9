#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "entspec/config.hpp"
#include "entspec/errors.hpp"

namespace entspec {

using cplx = std::complex<double>;

// Dense amplitude vector over num_qubits qubits. Qubit 0 is the least
// significant bit of the basis index. The normalized flag tracks whether the
// vector is a unit vector; post-selection clears it and the squared norm then
// carries the cumulative branch probability.
class Statevector {
  public:
    // |0...0> on n qubits.
    explicit Statevector(int num_qubits);

    // Wraps an explicit amplitude vector; the normalized flag is set from the
    // measured norm.
    static Statevector from_amplitudes(int num_qubits, Eigen::VectorXcd amps);

    int num_qubits() const { return num_qubits_; }
    std::int64_t dim() const { return std::int64_t{1} << num_qubits_; }
    bool normalized() const { return normalized_; }
    void set_normalized(bool v) { normalized_ = v; }

    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    Eigen::VectorXcd& amplitudes() { return amps_; }
    cplx amp(std::int64_t index) const { return amps_(index); }

    double norm() const { return amps_.norm(); }
    double squared_norm() const { return amps_.squaredNorm(); }

    // Rescales to unit norm; the zero vector cannot be normalized.
    void normalize();

  private:
    int num_qubits_;
    bool normalized_;
    Eigen::VectorXcd amps_;
};

// Dense 2^n x 2^n matrix. The normalized flag means trace 1 is expected;
// reduced states of post-selected branches carry trace = branch probability.
struct DensityMatrix {
    int num_qubits = 0;
    Eigen::MatrixXcd entries;
    bool normalized = true;
};

// Throws unless dm.entries is square of dimension 2^num_qubits, Hermitian
// within tolerance, and (when the flag is set) has unit trace.
void validate_density(const DensityMatrix& dm);

// Partial trace over every qubit not listed in keep. Output bit j of the
// reduced index corresponds to keep[j]. keep must be non-empty, distinct and
// in range.
DensityMatrix reduced_density_matrix(const Statevector& psi, const std::vector<int>& keep);

// <psi|P|psi> where P projects each listed qubit onto the listed outcome,
// computed on the raw (possibly unnormalized) amplitudes. A qubit listed twice
// with conflicting outcomes makes P = 0.
double uev(const Statevector& psi, const std::vector<std::pair<int, int>>& projector);

// (1/sqrt(2^n)) sum_x |x>|x> on 2n qubits; the two registers are [0,n) and
// [n,2n) and the state is symmetric under exchanging them.
Statevector prepare_max_entangled(int n);

// Binary serialization: little-endian u32 qubit count followed by 2^n
// (float64 re, float64 im) amplitude pairs.
void save_statevector(const std::string& path, const Statevector& psi);
Statevector load_statevector(const std::string& path);

}  // namespace entspec
