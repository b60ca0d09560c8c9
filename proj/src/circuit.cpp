#include "entspec/circuit.hpp"

#include <algorithm>
#include <cmath>

#include "entspec/gates.hpp"

namespace entspec {

// --- gate matrix factories ---------------------------------------------------

Eigen::MatrixXcd gate_i() { return Eigen::MatrixXcd::Identity(2, 2); }

Eigen::MatrixXcd gate_h() {
    Eigen::MatrixXcd m(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    m << s, s, s, -s;
    return m;
}

Eigen::MatrixXcd gate_x() {
    Eigen::MatrixXcd m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Eigen::MatrixXcd gate_y() {
    Eigen::MatrixXcd m(2, 2);
    m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
    return m;
}

Eigen::MatrixXcd gate_z() {
    Eigen::MatrixXcd m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Eigen::MatrixXcd gate_phase(double theta) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
    m(1, 1) = std::exp(cplx(0, theta));
    return m;
}

Eigen::MatrixXcd gate_ry(double theta) {
    Eigen::MatrixXcd m(2, 2);
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    m << c, -s, s, c;
    return m;
}

Eigen::MatrixXcd gate_swap() {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m(0, 0) = m(3, 3) = 1;
    m(1, 2) = m(2, 1) = 1;
    return m;
}

Eigen::MatrixXcd principal_sqrt_2x2(const Eigen::MatrixXcd& u) {
    if (u.rows() != 2 || u.cols() != 2) throw ArgumentError("principal_sqrt_2x2 needs a 2x2 matrix");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(u);
    if (es.info() != Eigen::Success) throw ArgumentError("eigendecomposition failed");
    Eigen::Vector2cd roots;
    for (int i = 0; i < 2; ++i) {
        const cplx lambda = es.eigenvalues()(i);
        roots(i) = std::exp(cplx(0, std::arg(lambda) / 2.0)) * std::sqrt(std::abs(lambda));
    }
    const Eigen::MatrixXcd v = es.eigenvectors();
    return v * roots.asDiagonal() * v.inverse();
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// --- circuit construction ----------------------------------------------------

Circuit::Circuit(int num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 1) throw ArgumentError("circuit qubit count must be >= 1");
}

Circuit& Circuit::gate(Eigen::MatrixXcd matrix, std::vector<int> targets, std::vector<int> controls) {
    const int k = static_cast<int>(targets.size());
    if (k < 1 || k > 3) throw ArgumentError("gates act on 1 to 3 target qubits");
    const Eigen::Index d = Eigen::Index{1} << k;
    if (matrix.rows() != d || matrix.cols() != d)
        throw DimensionError("gate matrix dimension does not match its target count");
    const double udev =
        (matrix.adjoint() * matrix - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
    if (udev > tol::unitary) throw ArgumentError("gate matrix is not unitary");

    std::uint64_t seen = 0;
    auto check_index = [&](int q) {
        if (q < 0 || q >= num_qubits_) throw ArgumentError("gate qubit index out of range");
        if (seen & (std::uint64_t{1} << q))
            throw ArgumentError("gate target/control indices must be distinct");
        seen |= std::uint64_t{1} << q;
    };
    for (int q : targets) check_index(q);
    for (int q : controls) check_index(q);

    steps_.push_back(Gate{std::move(matrix), std::move(targets), std::move(controls)});
    return *this;
}

Circuit& Circuit::project(int qubit, int outcome) {
    if (qubit < 0 || qubit >= num_qubits_) throw ArgumentError("projection qubit index out of range");
    if (outcome != 0 && outcome != 1) throw ArgumentError("projection outcome must be 0 or 1");
    steps_.push_back(Project{qubit, outcome});
    ++num_projections_;
    return *this;
}

Circuit& Circuit::h(int q) { return gate(gate_h(), {q}); }
Circuit& Circuit::x(int q) { return gate(gate_x(), {q}); }
Circuit& Circuit::y(int q) { return gate(gate_y(), {q}); }
Circuit& Circuit::z(int q) { return gate(gate_z(), {q}); }
Circuit& Circuit::phase(double theta, int q) { return gate(gate_phase(theta), {q}); }
Circuit& Circuit::ry(double theta, int q) { return gate(gate_ry(theta), {q}); }
Circuit& Circuit::cnot(int control, int target) { return gate(gate_x(), {target}, {control}); }
Circuit& Circuit::cz(int control, int target) { return gate(gate_z(), {target}, {control}); }
Circuit& Circuit::cphase(double theta, int control, int target) {
    return gate(gate_phase(theta), {target}, {control});
}
Circuit& Circuit::cry(double theta, int control, int target) {
    return gate(gate_ry(theta), {target}, {control});
}
Circuit& Circuit::swap(int a, int b) { return gate(gate_swap(), {a, b}); }
Circuit& Circuit::mcx(const std::vector<int>& controls, int target) {
    return gate(gate_x(), {target}, controls);
}
Circuit& Circuit::mcz(const std::vector<int>& controls, int target) {
    return gate(gate_z(), {target}, controls);
}

Circuit& Circuit::append(const Circuit& other) {
    if (other.num_qubits_ != num_qubits_) throw DimensionError("appended circuit width mismatch");
    for (const Step& s : other.steps_) {
        steps_.push_back(s);
        if (std::holds_alternative<Project>(s)) ++num_projections_;
    }
    return *this;
}

Circuit& Circuit::append_mapped(const Circuit& other, const std::vector<int>& map) {
    if (static_cast<int>(map.size()) != other.num_qubits_)
        throw DimensionError("qubit map size must equal the appended circuit width");
    std::uint64_t seen = 0;
    for (int q : map) {
        if (q < 0 || q >= num_qubits_) throw ArgumentError("qubit map entry out of range");
        if (seen & (std::uint64_t{1} << q)) throw ArgumentError("qubit map entries must be distinct");
        seen |= std::uint64_t{1} << q;
    }
    for (const Step& s : other.steps_) {
        if (const Gate* g = std::get_if<Gate>(&s)) {
            std::vector<int> targets, controls;
            targets.reserve(g->targets.size());
            controls.reserve(g->controls.size());
            for (int q : g->targets) targets.push_back(map[q]);
            for (int q : g->controls) controls.push_back(map[q]);
            steps_.push_back(Gate{g->matrix, std::move(targets), std::move(controls)});
        } else {
            const Project& p = std::get<Project>(s);
            steps_.push_back(Project{map[p.qubit], p.outcome});
            ++num_projections_;
        }
    }
    return *this;
}

Circuit& Circuit::append_controlled(const Circuit& other, const std::vector<int>& extra_controls) {
    if (other.num_qubits_ != num_qubits_) throw DimensionError("appended circuit width mismatch");
    if (other.has_projections())
        throw ArgumentError("cannot add controls to a circuit containing projections");
    for (const Step& s : other.steps_) {
        const Gate& g = std::get<Gate>(s);
        std::vector<int> controls = g.controls;
        for (int q : extra_controls) {
            if (std::find(g.targets.begin(), g.targets.end(), q) != g.targets.end() ||
                std::find(g.controls.begin(), g.controls.end(), q) != g.controls.end())
                throw ArgumentError("extra control overlaps a gate in the controlled circuit");
            controls.push_back(q);
        }
        // re-validates indices and unitarity
        gate(g.matrix, g.targets, std::move(controls));
    }
    return *this;
}

Circuit Circuit::dagger() const {
    if (has_projections()) throw ArgumentError("cannot take the adjoint of a projecting circuit");
    Circuit out(num_qubits_);
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
        const Gate& g = std::get<Gate>(*it);
        out.steps_.push_back(Gate{g.matrix.adjoint(), g.targets, g.controls});
    }
    return out;
}

// --- application kernels -----------------------------------------------------

void apply_gate_inplace(const Gate& g, Statevector& psi) {
    const int n = psi.num_qubits();
    const int k = static_cast<int>(g.targets.size());
    const std::int64_t dk = std::int64_t{1} << k;

    for (int q : g.targets)
        if (q < 0 || q >= n) throw DimensionError("gate target outside the state");
    for (int q : g.controls)
        if (q < 0 || q >= n) throw DimensionError("gate control outside the state");

    std::uint64_t cmask = 0;
    for (int q : g.controls) cmask |= std::uint64_t{1} << q;

    std::array<std::int64_t, 8> offset{};
    for (std::int64_t a = 0; a < dk; ++a)
        for (int j = 0; j < k; ++j)
            if (a & (std::int64_t{1} << j)) offset[a] |= std::int64_t{1} << g.targets[j];

    std::vector<int> sorted_targets(g.targets);
    std::sort(sorted_targets.begin(), sorted_targets.end());

    std::array<cplx, 64> m{};
    for (std::int64_t r = 0; r < dk; ++r)
        for (std::int64_t c = 0; c < dk; ++c) m[static_cast<std::size_t>(r * dk + c)] = g.matrix(r, c);

    Eigen::VectorXcd& amps = psi.amplitudes();
    const std::int64_t bases = std::int64_t{1} << (n - k);
    std::array<cplx, 8> v{};
    for (std::int64_t i = 0; i < bases; ++i) {
        std::int64_t base = i;
        for (int pos : sorted_targets)
            base = ((base >> pos) << (pos + 1)) | (base & ((std::int64_t{1} << pos) - 1));
        if ((static_cast<std::uint64_t>(base) & cmask) != cmask) continue;
        for (std::int64_t a = 0; a < dk; ++a) v[a] = amps(base | offset[a]);
        for (std::int64_t r = 0; r < dk; ++r) {
            cplx acc = 0;
            for (std::int64_t c = 0; c < dk; ++c) acc += m[static_cast<std::size_t>(r * dk + c)] * v[c];
            amps(base | offset[r]) = acc;
        }
    }
}

void apply_projection_inplace(const Project& p, Statevector& psi) {
    if (p.qubit < 0 || p.qubit >= psi.num_qubits())
        throw DimensionError("projection qubit outside the state");
    const std::uint64_t bit = std::uint64_t{1} << p.qubit;
    const std::uint64_t want = p.outcome ? bit : 0;
    Eigen::VectorXcd& amps = psi.amplitudes();
    for (std::int64_t i = 0; i < amps.size(); ++i)
        if ((static_cast<std::uint64_t>(i) & bit) != want) amps(i) = 0.0;
    psi.set_normalized(false);
}

void apply_circuit_inplace(const Circuit& c, Statevector& psi) {
    if (c.num_qubits() != psi.num_qubits())
        throw DimensionError("circuit and state qubit counts differ");
    for (const Step& s : c.steps()) {
        if (const Gate* g = std::get_if<Gate>(&s))
            apply_gate_inplace(*g, psi);
        else
            apply_projection_inplace(std::get<Project>(s), psi);
    }
}

Statevector apply_circuit(const Circuit& c, const Statevector& psi) {
    Statevector out = psi;
    apply_circuit_inplace(c, out);
    return out;
}

Statevector run_circuit(const Circuit& c) {
    Statevector psi(c.num_qubits());
    apply_circuit_inplace(c, psi);
    return psi;
}

}  // namespace entspec
