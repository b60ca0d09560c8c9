#include "entspec/history.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "entspec/config.hpp"
#include "entspec/gates.hpp"

namespace entspec {

namespace {

// out += op acting on the listed qubits (support[i] = local bit i) of in.
void apply_local_accum(const Eigen::MatrixXcd& op, const std::vector<int>& support, int num_qubits,
                       const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    const int k = static_cast<int>(support.size());
    const Eigen::Index local_dim = Eigen::Index{1} << k;
    std::vector<int> sorted = support;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::int64_t> offsets(static_cast<std::size_t>(local_dim));
    for (Eigen::Index l = 0; l < local_dim; ++l) {
        std::int64_t off = 0;
        for (int i = 0; i < k; ++i)
            if ((l >> i) & 1) off |= std::int64_t{1} << support[static_cast<std::size_t>(i)];
        offsets[static_cast<std::size_t>(l)] = off;
    }
    const std::int64_t outer = std::int64_t{1} << (num_qubits - k);
    Eigen::VectorXcd local(local_dim);
    for (std::int64_t b = 0; b < outer; ++b) {
        std::int64_t base = b;
        for (int i = 0; i < k; ++i) {
            const int pos = sorted[static_cast<std::size_t>(i)];
            base = ((base >> pos) << (pos + 1)) | (base & ((std::int64_t{1} << pos) - 1));
        }
        for (Eigen::Index l = 0; l < local_dim; ++l)
            local(l) = in(base | offsets[static_cast<std::size_t>(l)]);
        for (Eigen::Index r = 0; r < local_dim; ++r) {
            cplx acc = 0;
            for (Eigen::Index l = 0; l < local_dim; ++l) acc += op(r, l) * local(l);
            out(base | offsets[static_cast<std::size_t>(r)]) += acc;
        }
    }
}

// Dense matrix of a gate over [targets..., controls...] (controls as high bits).
std::pair<std::vector<int>, Eigen::MatrixXcd> gate_full_matrix(const Gate& g) {
    std::vector<int> support = g.targets;
    support.insert(support.end(), g.controls.begin(), g.controls.end());
    const int kt = static_cast<int>(g.targets.size());
    const int k = static_cast<int>(support.size());
    const Eigen::Index dim = Eigen::Index{1} << k;
    const std::int64_t cmask = ((std::int64_t{1} << k) - 1) & ~((std::int64_t{1} << kt) - 1);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        if ((col & cmask) != cmask) {
            m(col, col) = 1.0;
            continue;
        }
        const Eigen::Index tpart = col & ((Eigen::Index{1} << kt) - 1);
        for (Eigen::Index r = 0; r < (Eigen::Index{1} << kt); ++r)
            m((col & cmask) | r, col) = g.matrix(r, tpart);
    }
    return {std::move(support), std::move(m)};
}

// flag ^= [clause violated by the variable register], with optional extra
// controls (negated literal -> control on 1, plain literal -> control on 0).
void append_violation_toggle(Circuit& u, const PurificationLayout& lay,
                             const std::array<Literal, 2>& clause,
                             const std::vector<int>& extra_controls) {
    std::vector<int> controls = extra_controls, zeros;
    for (const Literal& lit : clause) {
        const int q = lay.var_qubit(lit.var);
        controls.push_back(q);
        if (!lit.negated) zeros.push_back(q);
    }
    for (int q : zeros) u.x(q);
    u.mcx(controls, lay.flag);
    for (int q : zeros) u.x(q);
}

double flag_zero_amplitude(const Circuit& u) {
    const Statevector probe = run_circuit(u);
    double p0 = 0;
    for (std::int64_t i = 0; i < probe.dim(); i += 2) p0 += std::norm(probe.amp(i));
    return std::sqrt(p0);
}

// One Grover step: Z on the flag reflects about the flag-0 branch, then
// U (X..X MCZ X..X) U^dag reflects about the prepared state. In the plane
// spanned by the flag-0 and flag-1 branches the step rotates by twice the
// preparation angle, so an input flag-0 amplitude sin(theta) = 1/2 lands on
// the flag-0 branch with amplitude sin(3 theta) = 1, positive sign.
//
// The |0...0> reflection only has to negate the prepared state's pullback
// U^dag Z_flag U |0...0> everywhere outside |0...0> itself, so `reflect` may
// be any qubit subset whose zero sector meets that pullback in |0...0> alone.
Circuit amplify_flag(const Circuit& u, const std::vector<int>& reflect) {
    if (u.has_projections())
        throw ArgumentError("amplitude amplification needs a projection-free preparer");
    if (std::abs(flag_zero_amplitude(u) - 0.5) > 1e-9)
        throw AmplitudeError("preparer flag-0 amplitude is not 1/2");
    Circuit c(u.num_qubits());
    c.append(u);
    c.z(0);
    c.append(u.dagger());
    for (int q : reflect) c.x(q);
    c.mcz(std::vector<int>(reflect.begin(), reflect.end() - 1), reflect.back());
    for (int q : reflect) c.x(q);
    c.append(u);
    return c;
}

void lower_gate(const Gate& g, std::vector<Gate>& out) {
    if (g.targets.size() + g.controls.size() <= 2) {
        out.push_back(g);
        return;
    }
    if (g.targets.size() != 1)
        throw ArgumentError("cannot lower multi-target gates with controls");
    const Eigen::MatrixXcd w = principal_sqrt_2x2(g.matrix);
    const int t = g.targets[0];
    const int last = g.controls.back();
    std::vector<int> rest(g.controls.begin(), g.controls.end() - 1);
    out.push_back(Gate{w, {t}, {last}});
    lower_gate(Gate{gate_x(), {last}, rest}, out);
    out.push_back(Gate{w.adjoint(), {t}, {last}});
    lower_gate(Gate{gate_x(), {last}, rest}, out);
    lower_gate(Gate{w, {t}, rest}, out);
}

Eigen::MatrixXcd proj(int outcome) {
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(2, 2);
    p(outcome, outcome) = 1.0;
    return p;
}

Eigen::MatrixXcd unit_pair(Eigen::Index dim, Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    m(r, c) = 1.0;
    return m;
}

DensityMatrix reduce_sector(const Eigen::VectorXcd& sector, int n_sys,
                            const std::vector<int>& keep) {
    return reduced_density_matrix(Statevector::from_amplitudes(n_sys, sector), keep);
}

}  // namespace

PurificationLayout purification_layout(const CnfFormula& f) {
    validate_formula(f);
    for (const auto& clause : f.clauses)
        if (clause[0].var == clause[1].var)
            throw ArgumentError("purification needs two distinct variables per clause");
    PurificationLayout lay;
    lay.n = f.num_vars;
    lay.num_clause_qubits = f.num_clauses();
    lay.flag = 0;
    lay.k_reg.resize(static_cast<std::size_t>(lay.num_clause_qubits));
    std::iota(lay.k_reg.begin(), lay.k_reg.end(), 1);
    lay.s_copy.resize(static_cast<std::size_t>(lay.n));
    std::iota(lay.s_copy.begin(), lay.s_copy.end(), 1 + lay.num_clause_qubits);
    lay.s_reg.resize(static_cast<std::size_t>(lay.n));
    std::iota(lay.s_reg.begin(), lay.s_reg.end(), 1 + lay.num_clause_qubits + lay.n);
    lay.total = 2 * lay.n + lay.num_clause_qubits + 1;
    const std::int64_t trace = build_hamiltonian(f).trace();
    if (trace <= 0) throw DegenerateError("formula has no violated clause anywhere");
    lay.a = 1.0 / std::sqrt(static_cast<double>(trace));
    return lay;
}

Circuit build_purification_circuit(const CnfFormula& f) {
    const PurificationLayout lay = purification_layout(f);
    const int C = lay.num_clause_qubits;
    Circuit u(lay.total);
    for (int q : lay.s_reg) u.h(q);
    for (int j = 0; j < lay.n; ++j) u.cnot(lay.s_reg[static_cast<std::size_t>(j)], lay.s_copy[static_cast<std::size_t>(j)]);
    // clause register: uniform unary superposition over k = 1..#C
    u.x(lay.k_reg[0]);
    for (int j = 2; j <= C; ++j)
        u.cry(2.0 * std::acos(1.0 / std::sqrt(C - j + 2.0)), lay.k_reg[static_cast<std::size_t>(j - 2)],
              lay.k_reg[static_cast<std::size_t>(j - 1)]);
    // telescoped clause evaluation: flag = [clause k satisfied]
    u.x(lay.flag);
    append_violation_toggle(u, lay, f.clauses[0], {});
    for (int j = 2; j <= C; ++j) {
        append_violation_toggle(u, lay, f.clauses[static_cast<std::size_t>(j - 2)],
                                {lay.k_reg[static_cast<std::size_t>(j - 1)]});
        append_violation_toggle(u, lay, f.clauses[static_cast<std::size_t>(j - 1)],
                                {lay.k_reg[static_cast<std::size_t>(j - 1)]});
    }
    return u;
}

Circuit oblivious_amplify(const Circuit& u) {
    if (u.num_qubits() < 2) throw ArgumentError("amplification needs at least one non-flag qubit");
    std::vector<int> reflect(static_cast<std::size_t>(u.num_qubits()));
    std::iota(reflect.begin(), reflect.end(), 0);
    return amplify_flag(u, reflect);
}

Circuit oblivious_amplify_cnf(const CnfFormula& f) {
    // On the purification circuit's pullback the copy register and flag are
    // exactly zero in every component (the copy CNOTs uncompute s_copy = s and
    // the evaluation toggles leave the flag where Z found it), so reflecting
    // over the (k, s) registers alone already isolates |0...0> and compiles to
    // far fewer two-qubit gates.
    const PurificationLayout lay = purification_layout(f);
    std::vector<int> reflect = lay.k_reg;
    reflect.insert(reflect.end(), lay.s_reg.begin(), lay.s_reg.end());
    return amplify_flag(build_purification_circuit(f), reflect);
}

std::vector<Gate> compile_two_qubit(const Circuit& c) {
    if (c.has_projections()) throw ArgumentError("cannot compile circuits with projections");
    std::vector<Gate> out;
    for (const Step& s : c.steps()) lower_gate(std::get<Gate>(s), out);
    return out;
}

std::vector<int> HistoryLayout::cut() const {
    std::vector<int> q = e_reg;
    q.push_back(flag_out);
    return q;
}

HistoryLayout build_history_layout(const CnfFormula& f) {
    HistoryLayout lay;
    lay.formula = f;
    lay.purif = purification_layout(f);
    const int n = lay.purif.n;
    lay.e_reg.resize(static_cast<std::size_t>(n));
    std::iota(lay.e_reg.begin(), lay.e_reg.end(), lay.purif.total);
    lay.h_reg.resize(static_cast<std::size_t>(n));
    std::iota(lay.h_reg.begin(), lay.h_reg.end(), lay.purif.total + n);
    lay.flag_out = lay.purif.total + 2 * n;
    lay.n_sys = lay.purif.total + 2 * n + 1;

    lay.gates = compile_two_qubit(oblivious_amplify_cnf(f));
    lay.T0 = static_cast<int>(lay.gates.size());
    for (int m = 0; m < n; ++m)
        lay.gates.push_back(Gate{gate_swap(),
                                 {lay.purif.s_reg[static_cast<std::size_t>(m)],
                                  lay.e_reg[static_cast<std::size_t>(m)]},
                                 {}});
    lay.gates.push_back(Gate{gate_x(), {lay.flag_out}, {}});
    lay.T = lay.T0 + n + 1;
    return lay;
}

double HistoryState::squared_norm() const {
    double s = 0;
    for (const auto& v : sectors) s += v.squaredNorm();
    return s;
}

Statevector HistoryState::to_statevector() const {
    if (n_sys + T > max_qubits())
        throw ScaleError("dense history embedding over " + std::to_string(n_sys + T) +
                         " qubits exceeds the cap of " + std::to_string(max_qubits()));
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(Eigen::Index{1} << (n_sys + T));
    for (int t = 0; t <= T; ++t) {
        const std::int64_t clock = ((std::int64_t{1} << t) - 1) << n_sys;
        for (Eigen::Index x = 0; x < sectors[static_cast<std::size_t>(t)].size(); ++x)
            amps(clock | x) = sectors[static_cast<std::size_t>(t)](x);
    }
    return Statevector::from_amplitudes(n_sys + T, std::move(amps));
}

HistoryState make_history_state(const std::vector<Gate>& gates, const Statevector& alpha) {
    HistoryState st;
    st.n_sys = alpha.num_qubits();
    st.T = static_cast<int>(gates.size());
    const double w = 1.0 / std::sqrt(st.T + 1.0);
    Statevector psi = alpha;
    st.sectors.reserve(static_cast<std::size_t>(st.T) + 1);
    st.sectors.push_back(w * psi.amplitudes());
    for (const Gate& g : gates) {
        apply_gate_inplace(g, psi);
        st.sectors.push_back(w * psi.amplitudes());
    }
    return st;
}

HistoryState build_history_state(const HistoryLayout& layout) {
    Circuit prep(layout.n_sys);
    for (std::size_t m = 0; m < layout.e_reg.size(); ++m) {
        prep.h(layout.e_reg[m]);
        prep.cnot(layout.e_reg[m], layout.h_reg[m]);
    }
    prep.x(layout.flag_out);
    return make_history_state(layout.gates, run_circuit(prep));
}

std::int64_t HistoryHamiltonian::legal_dim() const {
    return (std::int64_t{T} + 1) << n_sys;
}

HistoryHamiltonian make_history_hamiltonian(const std::vector<Gate>& gates, int n_sys,
                                            std::vector<LocalTerm> in_terms,
                                            std::vector<LocalTerm> out_terms) {
    if (gates.empty()) throw ArgumentError("history construction needs at least one gate");
    for (const Gate& g : gates)
        if (g.targets.size() + g.controls.size() > 2)
            throw ArgumentError("history gates must act on at most two qubits");
    for (const auto* list : {&in_terms, &out_terms})
        for (const LocalTerm& term : *list)
            if (term.support.size() > 4)
                throw ArgumentError("boundary terms must act on at most four system qubits");

    HistoryHamiltonian hh;
    hh.n_sys = n_sys;
    hh.T = static_cast<int>(gates.size());
    hh.gates = gates;
    hh.in_terms = std::move(in_terms);
    hh.out_terms = std::move(out_terms);
    const int T = hh.T;
    auto clock_qubit = [&](int j) { return n_sys + j - 1; };  // c_j, j = 1..T

    for (const LocalTerm& term : hh.in_terms) {
        LocalTerm full = term;
        full.label = "in:" + term.label;
        full.support.push_back(clock_qubit(1));
        full.op = kron(proj(0), term.op);
        hh.terms.push_back(std::move(full));
    }
    for (const LocalTerm& term : hh.out_terms) {
        LocalTerm full = term;
        full.label = "out:" + term.label;
        full.support.push_back(clock_qubit(T));
        full.op = kron(proj(1), term.op);
        hh.terms.push_back(std::move(full));
    }
    for (int t = 1; t <= T; ++t) {
        auto [gsupport, gmat] = gate_full_matrix(hh.gates[static_cast<std::size_t>(t - 1)]);
        const Eigen::Index gd = gmat.rows();
        const Eigen::MatrixXcd gi = Eigen::MatrixXcd::Identity(gd, gd);
        LocalTerm term;
        term.label = "prop:" + std::to_string(t);
        term.support = gsupport;
        // clock pattern pairs (previous state, this state) on the attached
        // clock qubits; q indexes read support order low to high
        Eigen::Index q_prev = 0, q_this = 0, qdim = 0;
        if (T == 1) {
            term.support.push_back(clock_qubit(1));
            qdim = 2;
            q_prev = 0;
            q_this = 1;
        } else if (t == 1) {
            term.support.push_back(clock_qubit(1));
            term.support.push_back(clock_qubit(2));
            qdim = 4;
            q_prev = 0;  // (c1,c2) = 00
            q_this = 1;  // (c1,c2) = 10
        } else if (t == T) {
            term.support.push_back(clock_qubit(T - 1));
            term.support.push_back(clock_qubit(T));
            qdim = 4;
            q_prev = 1;  // (c_{T-1},c_T) = 10
            q_this = 3;  // (c_{T-1},c_T) = 11
        } else {
            term.support.push_back(clock_qubit(t - 1));
            term.support.push_back(clock_qubit(t));
            term.support.push_back(clock_qubit(t + 1));
            qdim = 8;
            q_prev = 1;  // (1,0,0)
            q_this = 3;  // (1,1,0)
        }
        term.op = 0.5 * (kron(unit_pair(qdim, q_prev, q_prev), gi) +
                         kron(unit_pair(qdim, q_this, q_this), gi) -
                         kron(unit_pair(qdim, q_this, q_prev), gmat) -
                         kron(unit_pair(qdim, q_prev, q_this), gmat.adjoint()));
        hh.terms.push_back(std::move(term));
    }
    for (int j = 1; j < T; ++j) {
        LocalTerm term;
        term.label = "clock:" + std::to_string(j);
        term.support = {clock_qubit(j), clock_qubit(j + 1)};
        term.op = kron(proj(1), proj(0));  // (c_j, c_{j+1}) = (0, 1)
        hh.terms.push_back(std::move(term));
    }
    for (const LocalTerm& term : hh.terms)
        if (term.support.size() > 5) throw ArgumentError("term support exceeds five qubits");
    return hh;
}

namespace {

std::vector<LocalTerm> cnf_in_terms(const HistoryLayout& lay) {
    std::vector<LocalTerm> terms;
    for (int q = 0; q < lay.purif.total; ++q)
        terms.push_back(LocalTerm{"purif_zero:" + std::to_string(q), {q}, proj(1)});
    Eigen::MatrixXcd epr = Eigen::MatrixXcd::Zero(4, 4);
    epr(0, 0) = epr(0, 3) = epr(3, 0) = epr(3, 3) = 0.5;
    const Eigen::MatrixXcd defect = Eigen::MatrixXcd::Identity(4, 4) - epr;
    for (std::size_t m = 0; m < lay.e_reg.size(); ++m)
        terms.push_back(LocalTerm{"epr_defect:" + std::to_string(m),
                                  {lay.e_reg[m], lay.h_reg[m]},
                                  defect});
    terms.push_back(LocalTerm{"flag_one", {lay.flag_out}, proj(0)});
    return terms;
}

}  // namespace

HistoryHamiltonian build_history_hamiltonian(const HistoryLayout& layout) {
    std::vector<LocalTerm> out_terms{
        LocalTerm{"flag_done", {layout.flag_out}, proj(1)}};
    return make_history_hamiltonian(layout.gates, layout.n_sys, cnf_in_terms(layout),
                                    std::move(out_terms));
}

HistoryHamiltonian build_history_hamiltonian(const CnfFormula& f) {
    return build_history_hamiltonian(build_history_layout(f));
}

void apply_legal_block(const HistoryHamiltonian& hh, const std::vector<Eigen::VectorXcd>& in,
                       std::vector<Eigen::VectorXcd>& out) {
    const int T = hh.T;
    if (static_cast<int>(in.size()) != T + 1) throw DimensionError("sector count must be T + 1");
    const Eigen::Index dim = Eigen::Index{1} << hh.n_sys;
    out.assign(static_cast<std::size_t>(T) + 1, Eigen::VectorXcd::Zero(dim));
    for (int t = 1; t <= T; ++t) {
        auto [support, gmat] = gate_full_matrix(hh.gates[static_cast<std::size_t>(t - 1)]);
        const auto& prev = in[static_cast<std::size_t>(t - 1)];
        const auto& cur = in[static_cast<std::size_t>(t)];
        out[static_cast<std::size_t>(t - 1)] += 0.5 * prev;
        out[static_cast<std::size_t>(t)] += 0.5 * cur;
        apply_local_accum(-0.5 * gmat, support, hh.n_sys, prev, out[static_cast<std::size_t>(t)]);
        apply_local_accum(-0.5 * gmat.adjoint(), support, hh.n_sys, cur,
                          out[static_cast<std::size_t>(t - 1)]);
    }
    for (const LocalTerm& term : hh.in_terms)
        apply_local_accum(term.op, term.support, hh.n_sys, in[0], out[0]);
    for (const LocalTerm& term : hh.out_terms)
        apply_local_accum(term.op, term.support, hh.n_sys, in[static_cast<std::size_t>(T)],
                          out[static_cast<std::size_t>(T)]);
}

Eigen::MatrixXcd assemble_dense(const HistoryHamiltonian& hh) {
    const int total = hh.total_qubits();
    if (total > 14) throw ScaleError("dense history assembly is capped at 14 qubits");
    const Eigen::Index dim = Eigen::Index{1} << total;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::VectorXcd col(dim), acc(dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        col.setZero();
        col(c) = 1.0;
        acc.setZero();
        for (const LocalTerm& term : hh.terms)
            apply_local_accum(term.op, term.support, total, col, acc);
        m.col(c) = acc;
    }
    return m;
}

double ground_energy(const HistoryHamiltonian& hh, const HistoryState& state) {
    if (state.n_sys != hh.n_sys || state.T != hh.T)
        throw DimensionError("state and Hamiltonian shapes disagree");
    std::vector<Eigen::VectorXcd> out;
    apply_legal_block(hh, state.sectors, out);
    cplx e = 0;
    for (std::size_t t = 0; t < out.size(); ++t) e += state.sectors[t].dot(out[t]);
    return e.real();
}

namespace {

Eigen::VectorXcd flatten(const std::vector<Eigen::VectorXcd>& sectors) {
    const Eigen::Index per = sectors[0].size();
    Eigen::VectorXcd v(static_cast<Eigen::Index>(sectors.size()) * per);
    for (std::size_t t = 0; t < sectors.size(); ++t) v.segment(static_cast<Eigen::Index>(t) * per, per) = sectors[t];
    return v;
}

std::vector<Eigen::VectorXcd> unflatten(const Eigen::VectorXcd& v, int T, Eigen::Index per) {
    std::vector<Eigen::VectorXcd> sectors(static_cast<std::size_t>(T) + 1);
    for (int t = 0; t <= T; ++t) sectors[static_cast<std::size_t>(t)] = v.segment(t * per, per);
    return sectors;
}

}  // namespace

GapReport spectral_gap(const HistoryHamiltonian& hh, const HistoryState& ground,
                       const LanczosOptions& opts) {
    const Eigen::Index per = Eigen::Index{1} << hh.n_sys;
    const Eigen::Index N = (hh.T + 1) * per;
    Eigen::VectorXcd g = flatten(ground.sectors);
    g.normalize();

    auto matvec = [&](const Eigen::VectorXcd& v) {
        std::vector<Eigen::VectorXcd> out;
        apply_legal_block(hh, unflatten(v, hh.T, per), out);
        Eigen::VectorXcd w = flatten(out);
        w -= g * g.dot(w);  // deflate the known ground state
        return w;
    };

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(N);
    for (Eigen::Index i = 0; i < N; ++i) v(i) = cplx(nd(rng), nd(rng));
    v -= g * g.dot(v);
    v.normalize();

    std::vector<Eigen::VectorXcd> basis{v};
    std::vector<double> alphas, betas;
    GapReport report;
    for (int j = 0; j < opts.max_iterations; ++j) {
        Eigen::VectorXcd w = matvec(basis.back());
        const double alpha = basis.back().dot(w).real();
        alphas.push_back(alpha);
        w -= alpha * basis.back();
        if (j > 0) w -= betas.back() * basis[basis.size() - 2];
        for (const auto& b : basis) w -= b * b.dot(w);  // full reorthogonalization
        w -= g * g.dot(w);
        const double beta = w.norm();
        report.iterations = j + 1;

        const bool breakdown = beta < 1e-13;
        if ((j + 1) % 5 == 0 || breakdown || j + 1 == opts.max_iterations) {
            const int m = static_cast<int>(alphas.size());
            Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) tri(i, i) = alphas[static_cast<std::size_t>(i)];
            for (int i = 0; i + 1 < m; ++i)
                tri(i, i + 1) = tri(i + 1, i) = betas[static_cast<std::size_t>(i)];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
            report.theta = es.eigenvalues()(0);
            report.residual = breakdown ? 0.0 : beta * std::abs(es.eigenvectors()(m - 1, 0));
            if (breakdown || report.residual <= opts.residual_factor * report.theta) {
                report.converged = true;
                return report;
            }
        }
        if (breakdown) break;
        betas.push_back(beta);
        basis.push_back(w / beta);
    }
    return report;
}

IntermediateSpectra intermediate_spectra(const HistoryLayout& layout, const HistoryState& state) {
    if (state.n_sys != layout.n_sys || state.T != layout.T)
        throw DimensionError("state does not match the layout");
    const int T = state.T;
    const int n = layout.purif.n;
    const std::vector<int> cutq = layout.cut();
    const double root = std::sqrt(T + 1.0);

    IntermediateSpectra out;
    const Eigen::Index cut_dim = Eigen::Index{1} << (n + 1);
    Eigen::MatrixXcd tau_sum = Eigen::MatrixXcd::Zero(cut_dim, cut_dim);
    Eigen::MatrixXcd prime_sum = Eigen::MatrixXcd::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
    DensityMatrix rho;
    for (int t = 0; t <= T; ++t) {
        const Eigen::VectorXcd normalized = root * state.sectors[static_cast<std::size_t>(t)];
        const DensityMatrix cut_state = reduce_sector(normalized, state.n_sys, cutq);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cut_state.entries);
        SectorReport row;
        row.t = t;
        row.max_eig = es.eigenvalues().maxCoeff();
        row.min_nonzero_eig = 0.0;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double v = es.eigenvalues()(i);
            if (v > 1e-12 && (row.min_nonzero_eig == 0.0 || v < row.min_nonzero_eig))
                row.min_nonzero_eig = v;
        }
        out.per_t.push_back(row);

        tau_sum += reduce_sector(state.sectors[static_cast<std::size_t>(t)], state.n_sys, cutq).entries;
        const DensityMatrix on_e = reduce_sector(normalized, state.n_sys, layout.e_reg);
        if (t < T)
            prime_sum += on_e.entries;
        else
            rho = on_e;
    }

    TauDecomposition tau;
    tau.rho = rho;
    tau.rho_prime = DensityMatrix{n, prime_sum / static_cast<double>(T), true};
    tau.weight = 1.0 / (T + 1.0);
    tau.tau = DensityMatrix{n + 1, tau_sum, true};
    const Eigen::MatrixXcd expected =
        tau.weight * kron(proj(0), tau.rho.entries) +
        (1.0 - tau.weight) * kron(proj(1), tau.rho_prime.entries);
    tau.residual = (tau.tau.entries - expected).cwiseAbs().maxCoeff();
    out.tau = std::move(tau);
    return out;
}

std::string per_t_csv(const std::vector<SectorReport>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "t,max_eig,min_nonzero_eig\n";
    for (const SectorReport& r : rows) os << r.t << ',' << r.max_eig << ',' << r.min_nonzero_eig << '\n';
    return os.str();
}

}  // namespace entspec
