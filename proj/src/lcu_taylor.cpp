#include "entspec/lcu_taylor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "entspec/config.hpp"
#include "entspec/gates.hpp"

namespace entspec {

namespace {

Eigen::MatrixXcd pauli_letter(int letter) {
    switch (letter) {
        case 0: return gate_i();
        case 1: return gate_x();
        case 2: return gate_y();
        case 3: return gate_z();
    }
    throw ArgumentError("Pauli letter out of range");
}

// 2x2 unitary with <0|G|0> = v, |v| <= 1; used to inject scalar post-selection
// factors through an ancilla that starts and ends in |0>.
Eigen::MatrixXcd amp_gate(cplx v) {
    if (std::abs(v) > 1.0 + 1e-12) throw ArgumentError("amplitude embedding needs |v| <= 1");
    const double s = std::sqrt(std::max(0.0, 1.0 - std::norm(v)));
    Eigen::MatrixXcd m(2, 2);
    m << v, -s, s, std::conj(v);
    return m;
}

// Index-controlled Pauli letters onto the system, then (controlled) Hadamards
// on the index register. extra controls make the whole selector conditional.
void append_pauli_selector(Circuit& c, int n, const std::vector<int>& system,
                           const std::vector<int>& index, const std::vector<int>& extra) {
    auto with_extra = [&](std::initializer_list<int> base) {
        std::vector<int> v(base);
        v.insert(v.end(), extra.begin(), extra.end());
        return v;
    };
    for (int j = 0; j < n; ++j) {
        const int lo = index[2 * j], hi = index[2 * j + 1];
        c.x(hi);
        c.gate(gate_x(), {system[j]}, with_extra({lo, hi}));  // letter 01 = X
        c.x(hi);
        c.x(lo);
        c.gate(gate_y(), {system[j]}, with_extra({lo, hi}));  // letter 10 = Y
        c.x(lo);
        c.gate(gate_z(), {system[j]}, with_extra({lo, hi}));  // letter 11 = Z
    }
    for (int q : index) c.gate(gate_h(), {q}, extra);
}

double operator_norm(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

}  // namespace

PauliDecomposition pauli_decompose(const DensityMatrix& rho) {
    validate_density(rho);
    if (rho.num_qubits > 6) throw ScaleError("Pauli decomposition is capped at 6 qubits");
    const int n = rho.num_qubits;
    const std::int64_t dim = std::int64_t{1} << n;
    const std::int64_t strings = std::int64_t{1} << (2 * n);

    PauliDecomposition out;
    out.num_qubits = n;
    out.coefficients.resize(strings);
    std::vector<int> letters(static_cast<std::size_t>(n));
    for (std::int64_t s = 0; s < strings; ++s) {
        std::int64_t xmask = 0;
        for (int j = 0; j < n; ++j) {
            letters[static_cast<std::size_t>(j)] = static_cast<int>((s >> (2 * j)) & 3);
            if (letters[static_cast<std::size_t>(j)] == 1 || letters[static_cast<std::size_t>(j)] == 2)
                xmask |= std::int64_t{1} << j;
        }
        cplx tr = 0;
        for (std::int64_t b = 0; b < dim; ++b) {
            cplx phase = 1.0;
            for (int j = 0; j < n; ++j) {
                const int letter = letters[static_cast<std::size_t>(j)];
                const bool bit = (b >> j) & 1;
                if (letter == 2) phase *= bit ? cplx(0, 1) : cplx(0, -1);
                if (letter == 3 && bit) phase = -phase;
            }
            tr += phase * rho.entries(b ^ xmask, b);
        }
        out.coefficients(s) = tr.real() / static_cast<double>(dim);
    }
    return out;
}

Eigen::MatrixXcd pauli_matrix(int num_qubits, std::int64_t index) {
    if (num_qubits < 1 || num_qubits > 6) throw ArgumentError("Pauli strings need 1 to 6 qubits");
    if (index < 0 || index >= (std::int64_t{1} << (2 * num_qubits)))
        throw ArgumentError("Pauli string index out of range");
    Eigen::MatrixXcd m = pauli_letter(static_cast<int>((index >> (2 * (num_qubits - 1))) & 3));
    for (int j = num_qubits - 2; j >= 0; --j) m = kron(m, pauli_letter(static_cast<int>((index >> (2 * j)) & 3)));
    return m;
}

DensityMatrix pauli_recompose(const PauliDecomposition& a) {
    const int n = a.num_qubits;
    if (a.coefficients.size() != (std::int64_t{1} << (2 * n)))
        throw DimensionError("coefficient vector length must be 4^n");
    const Eigen::Index dim = Eigen::Index{1} << n;
    DensityMatrix out;
    out.num_qubits = n;
    out.entries = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::int64_t s = 0; s < a.coefficients.size(); ++s) {
        if (a.coefficients(s) == 0.0) continue;
        out.entries += a.coefficients(s) * pauli_matrix(n, s);
    }
    out.normalized = std::abs(out.entries.trace().real() - 1.0) <= 1e-9;
    return out;
}

int choose_K(double norm_rho_t, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ArgumentError("epsilon must lie in (0, 1)");
    if (norm_rho_t < 0.0) throw ArgumentError("norm bound must be nonnegative");
    if (norm_rho_t == 0.0) return 0;
    const double le = std::log(epsilon), lx = std::log(norm_rho_t);
    for (int K = 0; K <= 100000; ++K) {
        const double m = K + 1;
        if (m * (1.0 + lx - std::log(m)) <= le) return K;
    }
    throw ArgumentError("truncation order exceeds sane limits");
}

TaylorPlan make_plan(double norm_rho_t, double t, double epsilon) {
    return TaylorPlan{choose_K(norm_rho_t, epsilon), t, epsilon};
}

BlockCircuit encode_A(const Statevector& xi, const Circuit& prep, int system_qubits) {
    const int p = prep.num_qubits();
    const int n = system_qubits;
    if (n < 1 || n > p - 1) throw ArgumentError("system register must fit inside the preparer");
    if (xi.num_qubits() != p - 1)
        throw DimensionError("xi must cover every preparer qubit except the flag");

    // flag-0 branch of prep|0...0> must equal c|xi> exactly
    const Statevector prepped = run_circuit(prep);
    const std::int64_t xdim = std::int64_t{1} << (p - 1);
    cplx c = 0;
    for (std::int64_t y = 0; y < xdim; ++y) c += std::conj(xi.amp(y)) * prepped.amp(y << 1);
    double residual2 = 0;
    for (std::int64_t y = 0; y < xdim; ++y)
        residual2 += std::norm(prepped.amp(y << 1) - c * xi.amp(y));
    if (std::sqrt(residual2) > 1e-9)
        throw PrepError("flag-0 branch of the preparer does not produce the stated state");

    BlockCircuit bc;
    bc.circuit = Circuit(p + 2 * n);
    std::vector<int> index(static_cast<std::size_t>(2 * n));
    std::iota(index.begin(), index.end(), p);
    std::vector<int> system(static_cast<std::size_t>(n));
    std::iota(system.begin(), system.end(), p - n);  // top n preparer qubits
    for (int q : index) bc.circuit.h(q);
    // selector only; the Hadamard tail of append_pauli_selector is not wanted
    // here, so inline the letter gates
    for (int j = 0; j < n; ++j) {
        const int lo = index[static_cast<std::size_t>(2 * j)];
        const int hi = index[static_cast<std::size_t>(2 * j + 1)];
        bc.circuit.x(hi);
        bc.circuit.gate(gate_x(), {system[static_cast<std::size_t>(j)]}, {lo, hi});
        bc.circuit.x(hi);
        bc.circuit.x(lo);
        bc.circuit.gate(gate_y(), {system[static_cast<std::size_t>(j)]}, {lo, hi});
        bc.circuit.x(lo);
        bc.circuit.gate(gate_z(), {system[static_cast<std::size_t>(j)]}, {lo, hi});
    }
    std::vector<int> prep_map(static_cast<std::size_t>(p));
    std::iota(prep_map.begin(), prep_map.end(), 0);
    bc.circuit.append_mapped(prep.dagger(), prep_map);
    for (int q = 0; q < p; ++q) bc.post.emplace_back(q, 0);
    bc.block_register = index;
    bc.scale = std::conj(c) * std::pow(2.0, n);
    bc.input_norm = std::pow(2.0, n);  // formal uniform index input sum_i |i>
    return bc;
}

BlockCircuit v_rho_t(const PauliDecomposition& a, double t) {
    if (t == 0.0) throw ArgumentError("evolution time must be nonzero");
    const int n = a.num_qubits;
    BlockCircuit bc;
    bc.circuit = Circuit(3 * n);
    std::vector<int> system(static_cast<std::size_t>(n)), index(static_cast<std::size_t>(2 * n));
    std::iota(system.begin(), system.end(), 0);
    std::iota(index.begin(), index.end(), n);
    append_pauli_selector(bc.circuit, n, system, index, {});
    bc.block_register = system;
    for (int q : index) bc.post.emplace_back(q, 0);
    bc.scale = cplx(0, -1) / (t * std::pow(2.0, n));  // 1/(2^n * i * t)
    return bc;
}

BlockCircuit v_taylor(const PauliDecomposition& a, double t, int K) {
    if (t == 0.0) throw ArgumentError("evolution time must be nonzero");
    if (K < 1) throw ArgumentError("Taylor selector needs K >= 1");
    const int n = a.num_qubits;
    const int total = n + 2 * K + 2 * n * K;
    if (total > max_qubits())
        throw ArgumentError("Taylor selector register width exceeds the qubit cap");
    const double beta = std::max(1.0, 1.0 / std::abs(t));

    BlockCircuit bc;
    bc.circuit = Circuit(total);
    std::vector<int> system(static_cast<std::size_t>(n));
    std::iota(system.begin(), system.end(), 0);
    for (int m = 1; m <= K; ++m) {
        const int u = n + (m - 1);
        const int rot = n + K + (m - 1);
        std::vector<int> index(static_cast<std::size_t>(2 * n));
        std::iota(index.begin(), index.end(), n + 2 * K + (m - 1) * 2 * n);
        // factor 1/(m*beta) when stage m is active...
        bc.circuit.gate(amp_gate(cplx(1.0 / (m * beta), 0)), {rot}, {u});
        // ...and 1/(i*t*beta) when it is not
        bc.circuit.x(u);
        bc.circuit.gate(amp_gate(1.0 / (cplx(0, 1) * t * beta)), {rot}, {u});
        bc.circuit.x(u);
        append_pauli_selector(bc.circuit, n, system, index, {u});
        for (int q : index) bc.post.emplace_back(q, 0);
        bc.post.emplace_back(rot, 0);
    }
    bc.block_register = system;
    bc.scale = std::pow(cplx(0, -1) / (t * beta * std::pow(2.0, n)), K);
    return bc;
}

Circuit unary_superposition(int K) {
    if (K < 0) throw ArgumentError("unary register width must be nonnegative");
    Circuit c(std::max(K, 1));
    if (K == 0) return c;  // |0> on an idle qubit
    c.ry(2.0 * std::acos(1.0 / std::sqrt(K + 1.0)), 0);
    for (int j = 1; j < K; ++j) c.cry(2.0 * std::acos(1.0 / std::sqrt(K + 1.0 - j)), j - 1, j);
    return c;
}

void append_real_state_prep(Circuit& c, const Eigen::VectorXd& amplitudes,
                            const std::vector<int>& qubits) {
    const int d = static_cast<int>(qubits.size());
    if (d < 1 || d > 10) throw ArgumentError("state preparation needs 1 to 10 qubits");
    if (amplitudes.size() != (Eigen::Index{1} << d))
        throw DimensionError("amplitude vector length must be 2^d");
    if (std::abs(amplitudes.norm() - 1.0) > 1e-9)
        throw ArgumentError("amplitude vector must be normalized");

    // subtree probability sums, level l = top-l-bit prefixes
    std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(d) + 1);
    sums[static_cast<std::size_t>(d)] = amplitudes.array().square();
    for (int l = d - 1; l >= 0; --l) {
        sums[static_cast<std::size_t>(l)].resize(Eigen::Index{1} << l);
        for (Eigen::Index v = 0; v < (Eigen::Index{1} << l); ++v)
            sums[static_cast<std::size_t>(l)](v) =
                sums[static_cast<std::size_t>(l) + 1](2 * v) + sums[static_cast<std::size_t>(l) + 1](2 * v + 1);
    }
    for (int l = 0; l < d; ++l) {
        const int tq = qubits[static_cast<std::size_t>(d - 1 - l)];
        for (Eigen::Index v = 0; v < (Eigen::Index{1} << l); ++v) {
            const double p0 = sums[static_cast<std::size_t>(l) + 1](2 * v);
            const double p1 = sums[static_cast<std::size_t>(l) + 1](2 * v + 1);
            if (p0 + p1 <= 0.0) continue;  // unreachable subtree
            const double theta = 2.0 * std::atan2(std::sqrt(p1), std::sqrt(p0));
            if (std::abs(theta) < 1e-15) continue;
            std::vector<int> controls, zeros;
            for (int i = 0; i < l; ++i) {
                const int cq = qubits[static_cast<std::size_t>(d - 1 - i)];
                controls.push_back(cq);
                if (!((v >> (l - 1 - i)) & 1)) zeros.push_back(cq);
            }
            for (int q : zeros) c.x(q);
            c.gate(gate_ry(theta), {tq}, controls);
            for (int q : zeros) c.x(q);
        }
    }
    // sign flips on the negative entries
    std::vector<int> sign_controls(qubits.begin() + 1, qubits.end());
    for (Eigen::Index x = 0; x < amplitudes.size(); ++x) {
        if (amplitudes(x) >= 0.0) continue;
        std::vector<int> zeros;
        for (int i = 0; i < d; ++i)
            if (!((x >> i) & 1)) zeros.push_back(qubits[static_cast<std::size_t>(i)]);
        for (int q : zeros) c.x(q);
        c.mcz(sign_controls, qubits[0]);
        for (int q : zeros) c.x(q);
    }
}

Eigen::MatrixXcd extract_block(const BlockCircuit& bc) {
    const int b = static_cast<int>(bc.block_register.size());
    if (b < 1 || b > 4) throw ArgumentError("block extraction is capped at 4 block qubits");
    const int nq = bc.circuit.num_qubits();
    std::int64_t base = 0;
    for (const auto& [q, o] : bc.post)
        if (o) base |= std::int64_t{1} << q;
    auto place = [&](std::int64_t bits) {
        std::int64_t idx = base;
        for (int i = 0; i < b; ++i)
            if ((bits >> i) & 1) idx |= std::int64_t{1} << bc.block_register[static_cast<std::size_t>(i)];
        return idx;
    };
    const Eigen::Index dim = Eigen::Index{1} << b;
    Eigen::MatrixXcd out(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(Eigen::Index{1} << nq);
        std::int64_t in_idx = 0;
        for (int i = 0; i < b; ++i)
            if ((col >> i) & 1) in_idx |= std::int64_t{1} << bc.block_register[static_cast<std::size_t>(i)];
        amps(in_idx) = 1.0;
        Statevector psi = apply_circuit(bc.circuit, Statevector::from_amplitudes(nq, std::move(amps)));
        for (const auto& [q, o] : bc.post) apply_projection_inplace(Project{q, o}, psi);
        for (Eigen::Index row = 0; row < dim; ++row) out(row, col) = psi.amp(place(row));
    }
    return out;
}

AssembledExp assemble_exp(const PauliDecomposition& a, const TaylorPlan& plan,
                          bool force_operator_mode) {
    if (!(plan.epsilon > 0.0 && plan.epsilon < 1.0)) throw ArgumentError("epsilon must lie in (0, 1)");
    if (plan.K < 0) throw ArgumentError("truncation order must be nonnegative");
    const int n = a.num_qubits;
    const double t = plan.t;
    const int K = plan.K;

    const Eigen::MatrixXcd rho = pauli_recompose(a).entries;
    const Eigen::Index dim = rho.rows();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    if (es.info() != Eigen::Success) throw ArgumentError("eigendecomposition failed");
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(cplx(0, t * es.eigenvalues()(i)));
    const Eigen::MatrixXcd exact =
        es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();

    // truncated series sum_{k<=K} (i rho t)^k / k!
    Eigen::MatrixXcd series = Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(dim, dim);
    for (int k = 1; k <= K; ++k) {
        term = term * rho * (cplx(0, t) / static_cast<double>(k));
        series += term;
    }

    AssembledExp out;
    out.plan = plan;
    const double beta = t == 0.0 ? 1.0 : std::max(1.0, 1.0 / std::abs(t));
    out.scale = t == 0.0 ? cplx(1.0, 0.0)
                         : std::pow(cplx(0, -1) / (t * beta * std::pow(2.0, n)), K) *
                               std::pow(2.0, -K / 2.0) / std::sqrt(K + 1.0);
    out.block = out.scale * series;
    out.achieved_error = operator_norm(series - exact);
    if (out.achieved_error > plan.epsilon)
        throw TruncationError("truncated series misses the exact exponential by " +
                              std::to_string(out.achieved_error));

    const int total = n + 2 * K + 2 * n * K;
    const bool unit_trace = std::abs(a.coefficients(0) * std::pow(2.0, n) - 1.0) <= 1e-9;
    if (!force_operator_mode && t != 0.0 && K >= 1 && n <= 4 && total <= max_qubits() &&
        unit_trace) {
        BlockCircuit vt = v_taylor(a, t, K);
        BlockCircuit composed;
        composed.circuit = Circuit(total);
        std::vector<int> unary(static_cast<std::size_t>(K));
        std::iota(unary.begin(), unary.end(), n);
        composed.circuit.append_mapped(unary_superposition(K), unary);
        const Eigen::VectorXd atil = a.coefficients / a.coefficients.norm();
        for (int m = 0; m < K; ++m) {
            std::vector<int> reg(static_cast<std::size_t>(2 * n));
            std::iota(reg.begin(), reg.end(), n + 2 * K + m * 2 * n);
            append_real_state_prep(composed.circuit, atil, reg);
        }
        composed.circuit.append(vt.circuit);
        for (int q : unary) composed.circuit.h(q);
        composed.block_register = vt.block_register;
        composed.post = vt.post;
        for (int q : unary) composed.post.emplace_back(q, 0);
        composed.scale = out.scale;
        composed.input_norm = std::pow(a.coefficients.norm(), K);
        out.circuit = std::move(composed);
    }
    return out;
}

}  // namespace entspec
