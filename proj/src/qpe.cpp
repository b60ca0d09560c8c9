#include "entspec/qpe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "entspec/gates.hpp"
#include "entspec/lcu_taylor.hpp"

namespace entspec {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd handle_eigenvalues(const HamiltonianHandle& h) {
    if (h.cnf) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(h.cnf->violations.size()));
        for (std::size_t i = 0; i < h.cnf->violations.size(); ++i)
            v(static_cast<Eigen::Index>(i)) = static_cast<double>(h.cnf->violations[i]);
        return v;
    }
    if (h.diagonal) return *h.diagonal;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(*h.dense);
    if (es.info() != Eigen::Success) throw ArgumentError("eigendecomposition failed");
    return es.eigenvalues();
}

Eigen::MatrixXcd densify(const HamiltonianHandle& h) {
    const Eigen::Index dim = Eigen::Index{1} << h.num_qubits;
    if (h.dense) return *h.dense;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    const Eigen::VectorXd diag = handle_eigenvalues(h);  // diagonal reps: entries in basis order
    for (Eigen::Index i = 0; i < dim; ++i) m(i, i) = diag(i);
    return m;
}

int qubits_for_dim(Eigen::Index dim) {
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    if ((Eigen::Index{1} << n) != dim) throw DimensionError("operator dimension is not a power of 2");
    return n;
}

// Appends controlled-e^{-i theta H} (exact modes) or the polar-projected
// truncated-Taylor block of e^{+i theta H} (lcu mode; paired with the inverse
// Fourier transform so bins agree across modes).
void append_controlled_evolution(Circuit& c, const HamiltonianHandle& h, double theta, int control,
                                 const std::vector<int>& system, EvolutionMode mode,
                                 double lcu_epsilon) {
    const int n = h.num_qubits;
    switch (mode) {
        case EvolutionMode::exact_diagonal: {
            if (h.dense) throw ArgumentError("exact_diagonal mode needs a diagonal operator");
            if (h.formula) {
                // clause-factorized: each clause contributes phase theta on its
                // unique unsatisfying pattern (negated literal -> bit 1)
                const cplx ph = std::exp(cplx(0, -theta));
                for (const auto& clause : h.formula->clauses) {
                    const Literal a = clause[0], b = clause[1];
                    if (a.var == b.var) {
                        if (a.negated != b.negated) continue;  // tautology
                        Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
                        m(a.negated ? 1 : 0, a.negated ? 1 : 0) = ph;
                        c.gate(std::move(m), {system[var_bit(n, a.var)]}, {control});
                        continue;
                    }
                    const int idx = (a.negated ? 1 : 0) | (b.negated ? 2 : 0);
                    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(4, 4);
                    m(idx, idx) = ph;
                    c.gate(std::move(m),
                           {system[var_bit(n, a.var)], system[var_bit(n, b.var)]}, {control});
                }
                return;
            }
            if (n > 3) throw ScaleError("plain diagonal evolution is capped at 3 qubits");
            const Eigen::Index dim = Eigen::Index{1} << n;
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
            for (Eigen::Index i = 0; i < dim; ++i) m(i, i) = std::exp(cplx(0, -theta * (*h.diagonal)(i)));
            c.gate(std::move(m), system, {control});
            return;
        }
        case EvolutionMode::exact_expm: {
            if (n > 3) throw ScaleError("dense exponential evolution is capped at 3 qubits");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(densify(h));
            if (es.info() != Eigen::Success) throw ArgumentError("eigendecomposition failed");
            Eigen::VectorXcd phases(es.eigenvalues().size());
            for (Eigen::Index i = 0; i < phases.size(); ++i)
                phases(i) = std::exp(cplx(0, -theta * es.eigenvalues()(i)));
            Eigen::MatrixXcd u =
                es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
            c.gate(std::move(u), system, {control});
            return;
        }
        case EvolutionMode::lcu_taylor: {
            if (n > 3) throw ScaleError("lcu evolution gates are capped at 3 qubits");
            DensityMatrix m;
            m.num_qubits = n;
            m.entries = densify(h);
            m.normalized = false;
            const PauliDecomposition a = pauli_decompose(m);
            const TaylorPlan plan = make_plan(std::abs(theta) * std::max(h.lambda_max, 1e-12),
                                              theta, lcu_epsilon);
            const AssembledExp exp = assemble_exp(a, plan, /*force_operator_mode=*/true);
            Eigen::MatrixXcd block = exp.block / exp.scale;
            // nearest unitary (polar factor); deviation is O(epsilon)
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block,
                                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
            c.gate(svd.matrixU() * svd.matrixV().adjoint(), system, {control});
            return;
        }
    }
    throw ArgumentError("unknown evolution mode");
}

void validate_config(const PhaseEstimationConfig& cfg) {
    if (cfg.d_t < 1 || cfg.d_t > 10) throw ArgumentError("phase register needs 1 to 10 bits");
    if (cfg.r < 1 || cfg.r % 2 == 0) throw ArgumentError("repetition count r must be odd and >= 1");
}

}  // namespace

HamiltonianHandle HamiltonianHandle::from_cnf(const CnfFormula& f) {
    validate_formula(f);
    DiagonalHamiltonian h = build_hamiltonian(f);
    HamiltonianHandle out;
    out.num_qubits = h.num_vars;
    out.lambda_max = static_cast<double>(*std::max_element(h.violations.begin(), h.violations.end()));
    out.formula = f;
    out.cnf = std::move(h);
    return out;
}

HamiltonianHandle HamiltonianHandle::from_diagonal(Eigen::VectorXd diag) {
    HamiltonianHandle out;
    out.num_qubits = qubits_for_dim(diag.size());
    out.lambda_max = diag.maxCoeff();
    if (diag.minCoeff() < -1e-10)
        throw RangeError("diagonal spectrum must be nonnegative for the phase window");
    out.diagonal = std::move(diag);
    return out;
}

HamiltonianHandle HamiltonianHandle::from_dense(Eigen::MatrixXcd h) {
    if (h.rows() != h.cols()) throw DimensionError("operator must be square");
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > tol::hermitian)
        throw ArgumentError("operator must be Hermitian");
    HamiltonianHandle out;
    out.num_qubits = qubits_for_dim(h.rows());
    if (out.num_qubits > 10) throw ScaleError("dense operator handles are capped at 10 qubits");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw ArgumentError("eigendecomposition failed");
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw RangeError("spectrum must be nonnegative for the phase window");
    out.lambda_max = es.eigenvalues().maxCoeff();
    out.dense = std::move(h);
    return out;
}

bool HamiltonianHandle::integer_spectrum() const {
    if (cnf) return true;
    if (diagonal) {
        for (Eigen::Index i = 0; i < diagonal->size(); ++i)
            if (std::abs((*diagonal)(i)-std::round((*diagonal)(i))) > 1e-12) return false;
        return true;
    }
    return false;
}

double resolve_scale(const HamiltonianHandle& h, const PhaseEstimationConfig& cfg) {
    validate_config(cfg);
    const double D = std::pow(2.0, cfg.d_t);
    if (cfg.scale > 0.0) {
        if (cfg.scale * h.lambda_max * D > D - 1 + 1e-9)
            throw RangeError("explicit scale pushes the spectrum outside the phase window");
        return cfg.scale;
    }
    if (h.integer_spectrum()) {
        if (h.lambda_max > D - 1 + 1e-9)
            throw RangeError("integer spectrum does not fit the grid; raise d_t");
        return 1.0 / D;
    }
    if (h.lambda_max <= 0.0) return 1.0 / D;
    return (D - 1) / (D * h.lambda_max);
}

void append_qft(Circuit& c, const std::vector<int>& reg, bool inverse) {
    const int d = static_cast<int>(reg.size());
    if (d < 1) throw ArgumentError("Fourier transform needs at least one qubit");
    Circuit f(c.num_qubits());
    for (int i = d - 1; i >= 0; --i) {
        f.h(reg[i]);
        for (int m = i - 1; m >= 0; --m) f.cphase(2.0 * kPi / std::pow(2.0, i - m + 1), reg[m], reg[i]);
    }
    for (int i = 0; i < d / 2; ++i) f.swap(reg[i], reg[d - 1 - i]);
    c.append(inverse ? f.dagger() : f);
}

namespace {

// One phase-estimation round: Hadamards on the phase register, controlled
// powers 2^m from phase bit m, then the Fourier transform whose direction
// makes the register read bin g = s * lambda * 2^d_t.
void append_round(Circuit& c, const HamiltonianHandle& h, const PhaseEstimationConfig& cfg,
                  double s, const std::vector<int>& system, const std::vector<int>& phase_reg) {
    for (int q : phase_reg) c.h(q);
    for (int m = 0; m < cfg.d_t; ++m)
        append_controlled_evolution(c, h, 2.0 * kPi * s * std::pow(2.0, m), phase_reg[m], system,
                                    cfg.evolution, cfg.lcu_epsilon);
    append_qft(c, phase_reg, /*inverse=*/cfg.evolution == EvolutionMode::lcu_taylor);
}

}  // namespace

Circuit phase_estimation_circuit(const HamiltonianHandle& h, const PhaseEstimationConfig& cfg) {
    const double s = resolve_scale(h, cfg);
    const int n = h.num_qubits;
    Circuit c(n + cfg.d_t);
    std::vector<int> system(n), phase_reg(cfg.d_t);
    std::iota(system.begin(), system.end(), 0);
    std::iota(phase_reg.begin(), phase_reg.end(), n);
    append_round(c, h, cfg, s, system, phase_reg);
    return c;
}

Circuit concatenated_pe(const HamiltonianHandle& h, const PhaseEstimationConfig& cfg) {
    const double s = resolve_scale(h, cfg);
    const int n = h.num_qubits;
    Circuit c(n + cfg.r * cfg.d_t);
    std::vector<int> system(n);
    std::iota(system.begin(), system.end(), 0);
    for (int j = 0; j < cfg.r; ++j) {
        std::vector<int> phase_reg(cfg.d_t);
        std::iota(phase_reg.begin(), phase_reg.end(), n + j * cfg.d_t);
        append_round(c, h, cfg, s, system, phase_reg);
    }
    return c;
}

Circuit threshold_oracle(int d_t, double b) {
    if (d_t < 1 || d_t > 10) throw ArgumentError("threshold oracle needs 1 to 10 value bits");
    const double bg = b * std::pow(2.0, d_t);
    if (std::abs(bg - std::round(bg)) <= 1e-9)
        throw TieError("threshold lands on grid point " + std::to_string(bg));
    Circuit c(d_t + 1);
    const int anc = d_t;
    const std::int64_t dim = std::int64_t{1} << d_t;
    std::vector<int> controls(static_cast<std::size_t>(d_t));
    std::iota(controls.begin(), controls.end(), 0);
    for (std::int64_t k = 0; k < dim; ++k) {
        if (static_cast<double>(k) <= bg) continue;
        for (int bit = 0; bit < d_t; ++bit)
            if (!((k >> bit) & 1)) c.x(bit);
        c.mcx(controls, anc);
        for (int bit = 0; bit < d_t; ++bit)
            if (!((k >> bit) & 1)) c.x(bit);
    }
    return c;
}

PipelineLayout pipeline_layout(int n, const PhaseEstimationConfig& cfg) {
    validate_config(cfg);
    PipelineLayout lay;
    lay.n = n;
    lay.d_t = cfg.d_t;
    lay.r = cfg.r;
    lay.copy_reg.resize(n);
    std::iota(lay.copy_reg.begin(), lay.copy_reg.end(), 0);
    lay.system_reg.resize(n);
    std::iota(lay.system_reg.begin(), lay.system_reg.end(), n);
    int next = 2 * n;
    for (int j = 0; j < cfg.r; ++j) {
        std::vector<int> reg(cfg.d_t);
        std::iota(reg.begin(), reg.end(), next);
        next += cfg.d_t;
        lay.phase_regs.push_back(std::move(reg));
    }
    lay.f_reg.resize(cfg.r);
    std::iota(lay.f_reg.begin(), lay.f_reg.end(), next);
    next += cfg.r;
    lay.maj = next++;
    lay.total = next;
    return lay;
}

double pipeline_uev(const HamiltonianHandle& h, const CountPromise& p,
                    const PhaseEstimationConfig& cfg, const PipelineOptions& opts) {
    validate_config(cfg);
    if (p.lower <= p.upper) throw ArgumentError("count promise needs a > b");
    if (std::pow(2.0, -cfg.d_t) >= p.gap())
        throw ArgumentError("phase precision 2^-d_t must beat the promise gap a - b");

    // the promise itself is checked against the exact spectrum
    const Eigen::VectorXd eigs = handle_eigenvalues(h);
    for (Eigen::Index i = 0; i < eigs.size(); ++i)
        if (eigs(i) > p.upper && eigs(i) < p.lower)
            throw PromiseViolation("eigenvalue " + std::to_string(eigs(i)) +
                                   " lies strictly inside the promised window");

    const double s = resolve_scale(h, cfg);
    const PipelineLayout lay = pipeline_layout(h.num_qubits, cfg);
    Circuit c(lay.total);

    // V: the r phase-estimation rounds (kept separate for the inverse)
    Circuit v(lay.total);
    for (int j = 0; j < lay.r; ++j) append_round(v, h, cfg, s, lay.system_reg, lay.phase_regs[j]);
    c.append(v);

    // threshold oracles: bins k represent eigenvalues k/(s*2^d_t)
    const Circuit oracle = threshold_oracle(cfg.d_t, cfg.threshold_b * s);
    auto append_oracles = [&] {
        for (int j = 0; j < lay.r; ++j) {
            std::vector<int> map = lay.phase_regs[j];
            map.push_back(lay.f_reg[j]);
            c.append_mapped(oracle, map);
        }
    };
    append_oracles();

    // majority vote across the r threshold bits
    for (std::int64_t pat = 0; pat < (std::int64_t{1} << lay.r); ++pat) {
        if (2 * __builtin_popcountll(static_cast<unsigned long long>(pat)) <= lay.r) continue;
        for (int j = 0; j < lay.r; ++j)
            if (!((pat >> j) & 1)) c.x(lay.f_reg[j]);
        c.mcx(lay.f_reg, lay.maj);
        for (int j = 0; j < lay.r; ++j)
            if (!((pat >> j) & 1)) c.x(lay.f_reg[j]);
    }

    // uncompute the oracles (each is an involution), then invert the rounds
    if (!opts.skip_uncompute) append_oracles();
    c.append(v.dagger());

    // unnormalized maximally entangled input, amplitude 1 per (s, s) pair, so
    // the readout counts branches directly
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(Eigen::Index{1} << lay.total);
    for (std::int64_t x = 0; x < (std::int64_t{1} << lay.n); ++x)
        amps(x | (x << lay.n)) = 1.0;
    const Statevector psi =
        apply_circuit(c, Statevector::from_amplitudes(lay.total, std::move(amps)));
    std::vector<std::pair<int, int>> projector{{lay.maj, 0}};
    for (const auto& reg : lay.phase_regs)
        for (int q : reg) projector.emplace_back(q, 0);
    for (int q : lay.f_reg) projector.emplace_back(q, 0);
    return uev(psi, projector);
}

PipelineResult run_counting_pipeline(const HamiltonianHandle& h, const CountPromise& p,
                                     const PhaseEstimationConfig& cfg, const PipelineOptions& opts) {
    PipelineResult res;
    res.layout = pipeline_layout(h.num_qubits, cfg);
    res.scale = resolve_scale(h, cfg);
    res.uev = pipeline_uev(h, p, cfg, opts);
    res.rounded = std::llround(res.uev);
    if (std::abs(res.uev - static_cast<double>(res.rounded)) >= 0.25)
        throw ConfidenceError("readout " + std::to_string(res.uev) +
                              " is too far from an integer to trust");
    return res;
}

std::int64_t counting_pipeline(const HamiltonianHandle& h, const CountPromise& p,
                               const PhaseEstimationConfig& cfg) {
    return run_counting_pipeline(h, p, cfg).rounded;
}

}  // namespace entspec
