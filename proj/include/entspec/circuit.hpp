#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "entspec/statevector.hpp"

namespace entspec {

// Unitary gate step. matrix has dimension 2^k with k = targets.size() <= 3;
// targets[0] is the least significant bit of the local index. controls must
// all read |1> for the gate to act (use X sandwiches for 0-controls); they are
// unbounded in number and disjoint from targets.
struct Gate {
    Eigen::MatrixXcd matrix;
    std::vector<int> targets;
    std::vector<int> controls;
};

// Non-renormalizing post-selection: amplitudes with the opposite outcome are
// zeroed, the norm is left to carry the branch probability.
struct Project {
    int qubit = 0;
    int outcome = 0;
};

using Step = std::variant<Gate, Project>;

// Ordered list of gate and projection steps over a fixed qubit count. Builders
// validate eagerly (unitarity within 1e-10, index ranges, disjointness) so a
// constructed circuit is always applicable.
class Circuit {
  public:
    explicit Circuit(int num_qubits);

    int num_qubits() const { return num_qubits_; }
    const std::vector<Step>& steps() const { return steps_; }
    std::size_t size() const { return steps_.size(); }
    bool has_projections() const { return num_projections_ > 0; }

    Circuit& gate(Eigen::MatrixXcd matrix, std::vector<int> targets, std::vector<int> controls = {});
    Circuit& project(int qubit, int outcome);

    Circuit& h(int q);
    Circuit& x(int q);
    Circuit& y(int q);
    Circuit& z(int q);
    Circuit& phase(double theta, int q);
    Circuit& ry(double theta, int q);
    Circuit& cnot(int control, int target);
    Circuit& cz(int control, int target);
    Circuit& cphase(double theta, int control, int target);
    Circuit& cry(double theta, int control, int target);
    Circuit& swap(int a, int b);
    // X / Z on target under arbitrarily many 1-controls.
    Circuit& mcx(const std::vector<int>& controls, int target);
    Circuit& mcz(const std::vector<int>& controls, int target);

    // Appends other's steps verbatim (widths must match).
    Circuit& append(const Circuit& other);
    // Appends other's steps with qubit i of other placed on map[i].
    Circuit& append_mapped(const Circuit& other, const std::vector<int>& map);
    // Appends other's gates with extra controls added to each; other must be
    // projection-free.
    Circuit& append_controlled(const Circuit& other, const std::vector<int>& extra_controls);

    // Reversed adjoint circuit; only defined for projection-free circuits.
    Circuit dagger() const;

  private:
    int num_qubits_;
    int num_projections_ = 0;
    std::vector<Step> steps_;
};

// Applies gates and projections in order to a copy of psi. Projections zero
// the opposite-outcome amplitudes without renormalizing and clear the
// normalized flag; the returned squared norm is the cumulative branch
// probability.
Statevector apply_circuit(const Circuit& c, const Statevector& psi);

// In-place variants used on hot paths.
void apply_circuit_inplace(const Circuit& c, Statevector& psi);
void apply_gate_inplace(const Gate& g, Statevector& psi);
void apply_projection_inplace(const Project& p, Statevector& psi);

// Runs the circuit from |0...0>.
Statevector run_circuit(const Circuit& c);

}  // namespace entspec
