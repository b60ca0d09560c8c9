// Independent reference computations for the test suite. Everything here is
// built from explicit index arithmetic on dense matrices, deliberately not
// sharing code with the library kernels it cross-checks.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "entspec/circuit.hpp"
#include "entspec/statevector.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Dense 2^nq matrix of `m` on the listed targets with 1-controls, assembled
// entry by entry.
inline Mat embed_gate(int nq, const Mat& m, const std::vector<int>& targets,
                      const std::vector<int>& controls = {}) {
    const std::int64_t dim = std::int64_t{1} << nq;
    Mat out = Mat::Zero(dim, dim);
    const int k = static_cast<int>(targets.size());
    for (std::int64_t col = 0; col < dim; ++col) {
        bool active = true;
        for (int c : controls)
            if (!((col >> c) & 1)) active = false;
        if (!active) {
            out(col, col) = 1.0;
            continue;
        }
        std::int64_t tin = 0;
        for (int i = 0; i < k; ++i)
            if ((col >> targets[static_cast<std::size_t>(i)]) & 1) tin |= std::int64_t{1} << i;
        for (std::int64_t tout = 0; tout < (std::int64_t{1} << k); ++tout) {
            std::int64_t row = col;
            for (int i = 0; i < k; ++i) {
                const std::int64_t bit = std::int64_t{1} << targets[static_cast<std::size_t>(i)];
                if ((tout >> i) & 1)
                    row |= bit;
                else
                    row &= ~bit;
            }
            out(row, col) += m(tout, tin);
        }
    }
    return out;
}

inline Mat projector_matrix(int nq, int qubit, int outcome) {
    const std::int64_t dim = std::int64_t{1} << nq;
    Mat out = Mat::Zero(dim, dim);
    for (std::int64_t x = 0; x < dim; ++x)
        if (static_cast<int>((x >> qubit) & 1) == outcome) out(x, x) = 1.0;
    return out;
}

// Dense (generally non-unitary, if projections are present) matrix of a
// circuit: the product of every step's embedding.
inline Mat circuit_matrix(const entspec::Circuit& c) {
    const int nq = c.num_qubits();
    Mat out = Mat::Identity(std::int64_t{1} << nq, std::int64_t{1} << nq);
    for (const entspec::Step& s : c.steps()) {
        if (const auto* g = std::get_if<entspec::Gate>(&s))
            out = embed_gate(nq, g->matrix, g->targets, g->controls) * out;
        else if (const auto* p = std::get_if<entspec::Project>(&s))
            out = projector_matrix(nq, p->qubit, p->outcome) * out;
    }
    return out;
}

// Gate-list variant (compiled gate sequences).
inline Mat gates_matrix(int nq, const std::vector<entspec::Gate>& gates) {
    Mat out = Mat::Identity(std::int64_t{1} << nq, std::int64_t{1} << nq);
    for (const entspec::Gate& g : gates) out = embed_gate(nq, g.matrix, g.targets, g.controls) * out;
    return out;
}

// F(j,k) = exp(+2 pi i j k / d) / sqrt(d).
inline Mat dft(std::int64_t d) {
    Mat f(d, d);
    const double w = 2.0 * 3.14159265358979323846 / static_cast<double>(d);
    for (std::int64_t j = 0; j < d; ++j)
        for (std::int64_t k = 0; k < d; ++k)
            f(j, k) = std::exp(cplx(0.0, w * static_cast<double>(j * k))) / std::sqrt(static_cast<double>(d));
    return f;
}

// e^{i H t} of a Hermitian matrix by eigendecomposition.
inline Mat expm_i(const Mat& h, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Vec phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(cplx(0.0, es.eigenvalues()(i) * t));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// b on the low bits: v(i_a * dim_b + i_b) = a(i_a) * b(i_b).
inline Vec kron_vec(const Vec& a, const Vec& b) {
    Vec v(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j) v(i * b.size() + j) = a(i) * b(j);
    return v;
}

inline Mat kron_mat(const Mat& a, const Mat& b) {
    Mat m(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            m.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return m;
}

// Partial trace of |psi><psi| keeping the listed qubits (bit j of the reduced
// index = keep[j]), by direct summation over the traced configurations.
inline Mat reduce_state(const Vec& psi, int nq, const std::vector<int>& keep) {
    const int k = static_cast<int>(keep.size());
    std::vector<int> rest;
    for (int q = 0; q < nq; ++q) {
        bool kept = false;
        for (int kq : keep)
            if (kq == q) kept = true;
        if (!kept) rest.push_back(q);
    }
    const std::int64_t kd = std::int64_t{1} << k, rd = std::int64_t{1} << rest.size();
    Mat out = Mat::Zero(kd, kd);
    auto address = [&](std::int64_t kbits, std::int64_t rbits) {
        std::int64_t idx = 0;
        for (int i = 0; i < k; ++i)
            if ((kbits >> i) & 1) idx |= std::int64_t{1} << keep[static_cast<std::size_t>(i)];
        for (std::size_t i = 0; i < rest.size(); ++i)
            if ((rbits >> i) & 1) idx |= std::int64_t{1} << rest[i];
        return idx;
    };
    for (std::int64_t a = 0; a < kd; ++a)
        for (std::int64_t b = 0; b < kd; ++b)
            for (std::int64_t r = 0; r < rd; ++r)
                out(a, b) += psi(address(a, r)) * std::conj(psi(address(b, r)));
    return out;
}

// Leakage amplitude magnitude of phase estimation: register value k when the
// exact bin is g, on a d-bit register (D = 2^d).
inline double qpe_amp(double g, std::int64_t k, std::int64_t D) {
    const double pi = 3.14159265358979323846;
    const double x = g - static_cast<double>(k);
    const double denom = static_cast<double>(D) * std::sin(pi * x / static_cast<double>(D));
    if (std::abs(denom) < 1e-300) return 1.0;  // on-grid: full weight
    return std::abs(std::sin(pi * x) / denom);
}

inline Vec random_state(int nq, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Vec v(std::int64_t{1} << nq);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(nd(rng), nd(rng));
    v.normalize();
    return v;
}

inline Mat random_density(int nq, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    const std::int64_t dim = std::int64_t{1} << nq;
    Mat g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = cplx(nd(rng), nd(rng));
    Mat rho = g * g.adjoint();
    rho /= rho.trace().real();
    return rho;
}

inline Mat random_unitary(std::int64_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Mat g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = cplx(nd(rng), nd(rng));
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < dim; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
    return q;
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

inline double op_norm(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

}  // namespace oracle
