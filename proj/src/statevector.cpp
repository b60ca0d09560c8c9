#include "entspec/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace entspec {

namespace {

void check_qubit_count(int n) {
    if (n < 1) throw ArgumentError("qubit count must be >= 1");
    if (n > max_qubits())
        throw ScaleError("statevector over " + std::to_string(n) + " qubits exceeds the cap of " +
                         std::to_string(max_qubits()));
}

}  // namespace

Statevector::Statevector(int num_qubits) : num_qubits_(num_qubits), normalized_(true) {
    check_qubit_count(num_qubits);
    amps_ = Eigen::VectorXcd::Zero(std::int64_t{1} << num_qubits);
    amps_(0) = 1.0;
}

Statevector Statevector::from_amplitudes(int num_qubits, Eigen::VectorXcd amps) {
    check_qubit_count(num_qubits);
    if (amps.size() != (std::int64_t{1} << num_qubits))
        throw DimensionError("amplitude vector length does not match the qubit count");
    Statevector psi(num_qubits);
    psi.amps_ = std::move(amps);
    psi.normalized_ = std::abs(psi.amps_.squaredNorm() - 1.0) <= tol::norm;
    return psi;
}

void Statevector::normalize() {
    const double n = amps_.norm();
    if (n < 1e-300) throw ArgumentError("cannot normalize the zero vector");
    amps_ /= n;
    normalized_ = true;
}

void validate_density(const DensityMatrix& dm) {
    const std::int64_t d = std::int64_t{1} << dm.num_qubits;
    if (dm.num_qubits < 1 || dm.entries.rows() != d || dm.entries.cols() != d)
        throw DimensionError("density matrix dimension does not match its qubit count");
    const double herm = (dm.entries - dm.entries.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol::hermitian) throw ArgumentError("density matrix is not Hermitian");
    if (dm.normalized && std::abs(dm.entries.trace().real() - 1.0) > 1e-10)
        throw ArgumentError("density matrix flagged normalized but trace != 1");
}

DensityMatrix reduced_density_matrix(const Statevector& psi, const std::vector<int>& keep) {
    const int n = psi.num_qubits();
    if (keep.empty()) throw ArgumentError("keep set must be non-empty");
    std::uint64_t seen = 0;
    for (int q : keep) {
        if (q < 0 || q >= n) throw ArgumentError("keep qubit index out of range");
        if (seen & (std::uint64_t{1} << q)) throw ArgumentError("keep qubit listed twice");
        seen |= std::uint64_t{1} << q;
    }
    const int k = static_cast<int>(keep.size());
    const std::int64_t dk = std::int64_t{1} << k;

    // offset[a] = basis contribution of reduced index a on the kept qubits
    std::vector<std::int64_t> offset(dk, 0);
    for (std::int64_t a = 0; a < dk; ++a)
        for (int j = 0; j < k; ++j)
            if (a & (std::int64_t{1} << j)) offset[a] |= std::int64_t{1} << keep[j];

    // environment enumeration: insert zero bits at the kept positions
    std::vector<int> sorted_keep(keep);
    std::sort(sorted_keep.begin(), sorted_keep.end());
    const std::int64_t env_count = std::int64_t{1} << (n - k);

    DensityMatrix out;
    out.num_qubits = k;
    out.entries = Eigen::MatrixXcd::Zero(dk, dk);
    out.normalized = psi.normalized();

    Eigen::VectorXcd col(dk);
    const Eigen::VectorXcd& amps = psi.amplitudes();
    for (std::int64_t env = 0; env < env_count; ++env) {
        std::int64_t base = env;
        for (int pos : sorted_keep)
            base = ((base >> pos) << (pos + 1)) | (base & ((std::int64_t{1} << pos) - 1));
        for (std::int64_t a = 0; a < dk; ++a) col(a) = amps(base | offset[a]);
        out.entries.noalias() += col * col.adjoint();
    }
    return out;
}

double uev(const Statevector& psi, const std::vector<std::pair<int, int>>& projector) {
    std::uint64_t mask = 0;
    std::uint64_t value = 0;
    for (const auto& [q, outcome] : projector) {
        if (q < 0 || q >= psi.num_qubits()) throw ArgumentError("projector qubit index out of range");
        if (outcome != 0 && outcome != 1) throw ArgumentError("projector outcome must be 0 or 1");
        const std::uint64_t bit = std::uint64_t{1} << q;
        if ((mask & bit) && ((value >> q) & 1) != static_cast<std::uint64_t>(outcome))
            return 0.0;  // conflicting outcomes: the projector is identically zero
        mask |= bit;
        if (outcome) value |= bit;
    }
    double sum = 0.0;
    const Eigen::VectorXcd& amps = psi.amplitudes();
    for (std::int64_t i = 0; i < amps.size(); ++i)
        if ((static_cast<std::uint64_t>(i) & mask) == value) sum += std::norm(amps(i));
    return sum;
}

Statevector prepare_max_entangled(int n) {
    if (n < 1) throw ArgumentError("register size must be >= 1");
    check_qubit_count(2 * n);
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(std::int64_t{1} << (2 * n));
    const double a = std::pow(2.0, -0.5 * n);
    for (std::int64_t x = 0; x < (std::int64_t{1} << n); ++x) amps((x << n) | x) = a;
    return Statevector::from_amplitudes(2 * n, std::move(amps));
}

void save_statevector(const std::string& path, const Statevector& psi) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot open '" + path + "' for writing");
    const std::uint32_t n = static_cast<std::uint32_t>(psi.num_qubits());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    for (std::int64_t i = 0; i < psi.dim(); ++i) {
        const double re = psi.amp(i).real(), im = psi.amp(i).imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof re);
        out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
    if (!out) throw ArgumentError("failed writing '" + path + "'");
}

Statevector load_statevector(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || n < 1 || n > 30) throw FormatError("bad statevector header in '" + path + "'");
    if (static_cast<int>(n) > max_qubits()) throw ScaleError("stored statevector exceeds the qubit cap");
    Eigen::VectorXcd amps(std::int64_t{1} << n);
    for (std::int64_t i = 0; i < amps.size(); ++i) {
        double re = 0, im = 0;
        in.read(reinterpret_cast<char*>(&re), sizeof re);
        in.read(reinterpret_cast<char*>(&im), sizeof im);
        amps(i) = cplx(re, im);
    }
    if (!in) throw FormatError("truncated statevector file '" + path + "'");
    return Statevector::from_amplitudes(static_cast<int>(n), std::move(amps));
}

}  // namespace entspec
