#pragma once

#include <Eigen/Dense>
#include <complex>

namespace entspec {

// Standard 1-qubit gate matrices plus small helpers used by circuit builders.

Eigen::MatrixXcd gate_i();
Eigen::MatrixXcd gate_h();
Eigen::MatrixXcd gate_x();
Eigen::MatrixXcd gate_y();
Eigen::MatrixXcd gate_z();
// diag(1, e^{i theta})
Eigen::MatrixXcd gate_phase(double theta);
// [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]]
Eigen::MatrixXcd gate_ry(double theta);
// 4x4 SWAP
Eigen::MatrixXcd gate_swap();

// Principal square root of a 2x2 unitary (eigenphases halved into (-pi, pi]).
Eigen::MatrixXcd principal_sqrt_2x2(const Eigen::MatrixXcd& u);

// Kronecker product with the second factor on the low bits: out = a (x) b.
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

}  // namespace entspec
