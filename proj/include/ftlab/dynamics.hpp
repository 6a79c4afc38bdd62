#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftlab/lattice.hpp"
#include "ftlab/pauli.hpp"

namespace ftlab {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DensityState {
  Matrix rho;

  static DensityState from_pure(const Vector& psi) {
    DensityState s;
    s.rho = psi * psi.adjoint();
    return s;
  }

  double trace_real() const { return rho.trace().real(); }

  // Trace, Hermiticity and numerical positivity checks.
  void validate(double trace_tol = 1e-9, double herm_tol = 1e-9,
                double pos_tol = 1e-8) const {
    if (std::abs(rho.trace().real() - 1.0) > trace_tol ||
        std::abs(rho.trace().imag()) > trace_tol)
      throw IntegrationError("density matrix trace drifted beyond tolerance");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > herm_tol)
      throw IntegrationError("density matrix lost Hermiticity");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -pos_tol)
      throw IntegrationError("density matrix lost positivity");
  }
};

// Error dynamics of the master equation: a Hermitian perturbation plus
// Lindblad generators, all normalized to unit operator norm, with a single
// strength knob gamma. Lindblads are Pauli products, which keeps every
// generator this project uses exactly representable and cheap to apply.
struct NoiseModel {
  std::vector<PauliOp> lindblads;
  std::vector<PauliOp> h_check;  // perturbation terms; empty means none
  double gamma = 0.0;

  NoiseModel() = default;
  NoiseModel(std::vector<PauliOp> ls, double g) : lindblads(std::move(ls)), gamma(g) {
    if (g < 0) throw std::invalid_argument("noise strength must be nonnegative");
    for (const auto& l : lindblads)
      if (std::abs(std::abs(l.coeff) - 1.0) > 1e-12)
        throw std::invalid_argument("lindblad operators must have unit operator norm");
  }

  // Spin flips and phase flips on every edge of the lattice.
  static NoiseModel single_edge_paulis(const ToricLattice& lat, double gamma,
                                       bool x_axis = true, bool z_axis = true) {
    const int n = lat.n_edges();
    std::vector<PauliOp> ls;
    for (int e = 0; e < n; ++e) {
      if (x_axis) ls.push_back(PauliOp::x_on(n, 1u << e));
      if (z_axis) ls.push_back(PauliOp::z_on(n, 1u << e));
    }
    return NoiseModel(std::move(ls), gamma);
  }
};

namespace detail {

// Schrodinger-picture right-hand side dual to the Heisenberg master equation:
// F(rho) = -i[H, rho] + gamma * ( -i[Hcheck, rho] + sum_l (L rho L - rho) ).
// The dissipator shape uses L = L†, L^2 = 1, which unit-norm Pauli products satisfy.
inline void master_rhs(const PauliSum& h, const NoiseModel& noise, const Matrix& rho,
                       Matrix& out, Matrix& scratch) {
  h.commutator_times_minus_i(rho, out);
  if (noise.gamma <= 0.0) return;
  if (!noise.h_check.empty()) {
    PauliSum pert{h.n_qubits, 0.0, noise.h_check};
    pert.commutator_times_minus_i(rho, scratch);
    out += noise.gamma * scratch;
  }
  for (const auto& l : noise.lindblads) {
    conjugate_pauli(l, rho, scratch);
    out += noise.gamma * (scratch - rho);
  }
}

inline void rk4_step(const PauliSum& h, const NoiseModel& noise, Matrix& rho, double dt,
                     std::array<Matrix, 5>& work) {
  auto& [k1, k2, k3, k4, scratch] = work;
  master_rhs(h, noise, rho, k1, scratch);
  master_rhs(h, noise, Matrix(rho + 0.5 * dt * k1), k2, scratch);
  master_rhs(h, noise, Matrix(rho + 0.5 * dt * k2), k3, scratch);
  master_rhs(h, noise, Matrix(rho + dt * k3), k4, scratch);
  rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void schrodinger_rk4_step(const PauliSum& h, Vector& psi, double dt) {
  const Cxd mi{0.0, -1.0};
  Vector k1, k2, k3, k4, tmp;
  h.apply(psi, tmp); k1 = mi * tmp;
  h.apply(Vector(psi + 0.5 * dt * k1), tmp); k2 = mi * tmp;
  h.apply(Vector(psi + 0.5 * dt * k2), tmp); k3 = mi * tmp;
  h.apply(Vector(psi + dt * k3), tmp); k4 = mi * tmp;
  psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  psi.normalize();
}

}  // namespace detail

// Expectation-value records over a fixed observable set.
struct Trajectory {
  std::vector<double> times;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;  // values[time_index][obs_index]

  int time_index(double t, double tol = 1e-9) const {
    for (size_t i = 0; i < times.size(); ++i)
      if (std::abs(times[i] - t) <= tol) return static_cast<int>(i);
    throw std::invalid_argument("trajectory has no sample at requested time");
  }
  double value(double t, size_t obs) const {
    return values[static_cast<size_t>(time_index(t))][obs];
  }
};

// Max over observables of |a_j(T) - b_j(T)|: the fault-tolerance accuracy.
inline double accuracy_delta(const Trajectory& a, const Trajectory& b, double t_final) {
  if (a.labels != b.labels)
    throw std::invalid_argument("accuracy_delta: trajectories carry different observables");
  const auto ia = static_cast<size_t>(a.time_index(t_final));
  const auto ib = static_cast<size_t>(b.time_index(t_final));
  double d = 0.0;
  for (size_t j = 0; j < a.labels.size(); ++j)
    d = std::max(d, std::abs(a.values[ia][j] - b.values[ib][j]));
  return d;
}

struct EvolveOptions {
  bool check_convergence = true;   // rerun at half step, compare to 1e-6
  bool validate_states = true;     // trace/Hermiticity/positivity at samples
  double convergence_tol = 1e-6;
};

// Integrates the master equation from rho0 with fixed-step RK4, sampling the
// observables at the requested times. Fails loudly when halving the step
// still moves the sampled expectations by more than the tolerance.
inline Trajectory lindblad_evolve(const Matrix& rho0, const PauliSum& h,
                                  const NoiseModel& noise, double dt_int,
                                  const std::vector<double>& sample_times,
                                  const std::vector<Observable>& observables,
                                  Matrix* final_state = nullptr,
                                  const EvolveOptions& opts = {}) {
  if (dt_int <= 0) throw std::invalid_argument("integrator step must be positive");
  auto run = [&](double step, Matrix* out_state) {
    Trajectory traj;
    for (const auto& o : observables) traj.labels.push_back(o.label);
    Matrix rho = rho0;
    std::array<Matrix, 5> work;
    double t = 0.0;
    auto record = [&](double at) {
      traj.times.push_back(at);
      std::vector<double> row;
      for (const auto& o : observables) row.push_back(o.expectation(rho));
      traj.values.push_back(std::move(row));
      if (opts.validate_states) DensityState{rho}.validate();
    };
    for (double target : sample_times) {
      if (target < t - 1e-12) throw std::invalid_argument("sample times must be ascending");
      const double span = target - t;
      const long n_sub = std::max(1L, static_cast<long>(std::ceil(span / step - 1e-12)));
      const double hstep = span / static_cast<double>(n_sub);
      if (span > 1e-15)
        for (long i = 0; i < n_sub; ++i) detail::rk4_step(h, noise, rho, hstep, work);
      t = target;
      record(t);
    }
    if (out_state) *out_state = rho;
    return traj;
  };

  Trajectory traj = run(dt_int, final_state);
  if (opts.check_convergence) {
    Trajectory half = run(dt_int / 2.0, nullptr);
    double worst = 0.0;
    for (size_t i = 0; i < traj.values.size(); ++i)
      for (size_t j = 0; j < traj.values[i].size(); ++j)
        worst = std::max(worst, std::abs(traj.values[i][j] - half.values[i][j]));
    if (worst >= opts.convergence_tol)
      throw IntegrationError("master-equation step too large: halving it moved "
                             "expectations by " + std::to_string(worst));
  }
  return traj;
}

// Closed-system pure-state evolution (the gamma = 0 fast path).
inline Trajectory unitary_evolve(const Vector& psi0, const PauliSum& h, double dt_int,
                                 const std::vector<double>& sample_times,
                                 const std::vector<Observable>& observables,
                                 Vector* final_state = nullptr) {
  Trajectory traj;
  for (const auto& o : observables) traj.labels.push_back(o.label);
  Vector psi = psi0;
  double t = 0.0;
  for (double target : sample_times) {
    const double span = target - t;
    const long n_sub = std::max(1L, static_cast<long>(std::ceil(span / dt_int - 1e-12)));
    const double hstep = span / static_cast<double>(n_sub);
    if (span > 1e-15)
      for (long i = 0; i < n_sub; ++i) detail::schrodinger_rk4_step(h, psi, hstep);
    t = target;
    traj.times.push_back(t);
    std::vector<double> row;
    for (const auto& o : observables) row.push_back(o.expectation(psi));
    traj.values.push_back(std::move(row));
  }
  if (final_state) *final_state = psi;
  return traj;
}

// Exact dense evolution through the eigendecomposition of H; the reference
// route the product formula is checked against.
class ExactEvolver {
 public:
  explicit ExactEvolver(const Matrix& h) : es_(h) {
    if (es_.info() != Eigen::Success)
      throw std::runtime_error("eigendecomposition of the Hamiltonian failed");
  }

  Matrix propagator(double t) const {
    const auto& v = es_.eigenvectors();
    Vector phases(es_.eigenvalues().size());
    for (int i = 0; i < phases.size(); ++i)
      phases[i] = std::exp(Cxd(0.0, -es_.eigenvalues()[i] * t));
    return v * phases.asDiagonal() * v.adjoint();
  }
  Matrix evolve_density(const Matrix& rho0, double t) const {
    const Matrix u = propagator(t);
    return u * rho0 * u.adjoint();
  }
  Vector evolve_pure(const Vector& psi0, double t) const { return propagator(t) * psi0; }

  const Eigen::VectorXd& eigenvalues() const { return es_.eigenvalues(); }

 private:
  Eigen::SelfAdjointEigenSolver<Matrix> es_;
};

// One local term of the simulated Hamiltonian: constant + prefactor * P.
struct LocalTerm {
  double constant = 0.0;
  double prefactor = 1.0;
  PauliOp op;
  uint32_t support() const { return op.support(); }
};

// Per-gate noise applied after each enacted term, on that term's support
// qubits only: an exact Pauli channel of strength gamma_s * dt per term.
struct GateNoise {
  double gamma_s = 0.0;
  bool x_axis = true;
  bool z_axis = true;
};

struct TrotterPlan {
  double dt = 0.0;
  long n_steps = 0;
  std::vector<int> term_order;  // empty means natural order
  GateNoise gate_noise;
  int sample_stride = 1;  // record every this many steps (stroboscopic)

  void validate(size_t n_terms) const {
    if (dt <= 0) throw std::invalid_argument("trotter step must be positive");
    if (n_steps < 1) throw std::invalid_argument("trotter plan needs at least one step");
    if (!term_order.empty()) {
      if (term_order.size() != n_terms)
        throw std::invalid_argument("term order must permute all terms");
      std::vector<bool> seen(n_terms, false);
      for (int i : term_order) {
        if (i < 0 || static_cast<size_t>(i) >= n_terms || seen[i])
          throw std::invalid_argument("term order is not a permutation");
        seen[i] = true;
      }
    }
  }
};

namespace detail {

// rho <- U rho U† with U = exp(-i (c + a P) dt) = phase * (cos(a dt) - i sin(a dt) P).
inline void apply_term_exponential(const LocalTerm& term, double dt, Matrix& rho,
                                   Matrix& t1, Matrix& t2) {
  const double c = std::cos(term.prefactor * dt);
  const double s = std::sin(term.prefactor * dt);
  conjugate_pauli(term.op, rho, t1);  // P rho P
  t2.setZero(rho.rows(), rho.cols());
  add_pauli_left(term.op, rho, t2);   // P rho
  Matrix right = Matrix::Zero(rho.rows(), rho.cols());
  add_pauli_right(term.op, rho, right);  // rho P
  rho = c * c * rho + s * s * t1 - Cxd{0.0, 1.0} * (c * s) * (t2 - right);
}

inline void apply_term_exponential(const LocalTerm& term, double dt, Vector& psi,
                                   Vector& tmp) {
  const double c = std::cos(term.prefactor * dt);
  const double s = std::sin(term.prefactor * dt);
  apply_pauli(term.op, psi, tmp);
  const Cxd phase = std::exp(Cxd(0.0, -term.constant * dt));
  psi = phase * (c * psi - Cxd{0.0, 1.0} * s * tmp);
}

// Exact single-Pauli dephasing/flip channel e^{c D[sigma]}:
// rho -> (1-p) rho + p sigma rho sigma with p = (1 - e^{-2c})/2.
inline void apply_pauli_channel(const PauliOp& sigma, double strength, Matrix& rho,
                                Matrix& tmp) {
  if (strength <= 0.0) return;
  const double p = 0.5 * (1.0 - std::exp(-2.0 * strength));
  conjugate_pauli(sigma, rho, tmp);
  rho = (1.0 - p) * rho + p * tmp;
}

}  // namespace detail

// Materialized step propagator of the noiseless product formula (one full
// sweep through the terms); unitary by construction, checked in tests.
inline Matrix trotter_step_unitary(const std::vector<LocalTerm>& terms,
                                   const TrotterPlan& plan) {
  const int d = terms.at(0).op.dim();
  Matrix u = Matrix::Identity(d, d);
  std::vector<int> order(plan.term_order);
  if (order.empty()) {
    order.resize(terms.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  }
  for (int i : order) {
    const LocalTerm& t = terms[i];
    const double c = std::cos(t.prefactor * plan.dt);
    const double s = std::sin(t.prefactor * plan.dt);
    const Cxd phase = std::exp(Cxd(0.0, -t.constant * plan.dt));
    Matrix term_u = phase * (c * Matrix::Identity(d, d) -
                             Cxd{0.0, 1.0} * s * t.op.to_dense());
    u = term_u * u;
  }
  return u;
}

// Stroboscopic noisy product-formula channel. Applies each term exponential
// in order, then the per-gate noise channel on that term's support qubits,
// and samples at multiples of dt.
inline Trajectory trotter_channel(const Matrix& rho0, const std::vector<LocalTerm>& terms,
                                  const TrotterPlan& plan,
                                  const std::vector<Observable>& observables,
                                  Matrix* final_state = nullptr,
                                  bool validate_states = false) {
  plan.validate(terms.size());
  for (const auto& t : terms)
    if (std::popcount(t.support()) > 4)
      throw std::invalid_argument("trotter term acts on more than 4 qubits");

  std::vector<int> order(plan.term_order);
  if (order.empty()) {
    order.resize(terms.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  }

  const int n = terms.at(0).op.n_qubits;
  Trajectory traj;
  for (const auto& o : observables) traj.labels.push_back(o.label);
  Matrix rho = rho0;
  Matrix t1, t2;
  auto record = [&](double at) {
    traj.times.push_back(at);
    std::vector<double> row;
    for (const auto& o : observables) row.push_back(o.expectation(rho));
    traj.values.push_back(std::move(row));
    if (validate_states) DensityState{rho}.validate();
  };
  record(0.0);
  const double noise_strength = plan.gate_noise.gamma_s * plan.dt;
  for (long step = 1; step <= plan.n_steps; ++step) {
    for (int i : order) {
      detail::apply_term_exponential(terms[i], plan.dt, rho, t1, t2);
      if (noise_strength > 0.0) {
        uint32_t rest = terms[i].support();
        while (rest) {
          const int q = std::countr_zero(rest);
          rest &= rest - 1;
          if (plan.gate_noise.x_axis)
            detail::apply_pauli_channel(PauliOp::x_on(n, 1u << q), noise_strength, rho, t1);
          if (plan.gate_noise.z_axis)
            detail::apply_pauli_channel(PauliOp::z_on(n, 1u << q), noise_strength, rho, t1);
        }
      }
    }
    if (step % plan.sample_stride == 0 || step == plan.n_steps)
      record(static_cast<double>(step) * plan.dt);
  }
  if (final_state) *final_state = rho;
  return traj;
}

// Pure-state product formula (no gate noise).
inline Trajectory trotter_channel_pure(const Vector& psi0,
                                       const std::vector<LocalTerm>& terms,
                                       const TrotterPlan& plan,
                                       const std::vector<Observable>& observables,
                                       Vector* final_state = nullptr) {
  plan.validate(terms.size());
  if (plan.gate_noise.gamma_s > 0.0)
    throw std::invalid_argument("pure-state path cannot carry gate noise");
  std::vector<int> order(plan.term_order);
  if (order.empty()) {
    order.resize(terms.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  }
  Trajectory traj;
  for (const auto& o : observables) traj.labels.push_back(o.label);
  Vector psi = psi0, tmp;
  auto record = [&](double at) {
    traj.times.push_back(at);
    std::vector<double> row;
    for (const auto& o : observables) row.push_back(o.expectation(psi));
    traj.values.push_back(std::move(row));
  };
  record(0.0);
  for (long step = 1; step <= plan.n_steps; ++step) {
    for (int i : order) detail::apply_term_exponential(terms[i], plan.dt, psi, tmp);
    if (step % plan.sample_stride == 0 || step == plan.n_steps)
      record(static_cast<double>(step) * plan.dt);
  }
  if (final_state) *final_state = psi;
  return traj;
}

// ---- Toric-code operators on the exact engine ----

inline void check_dense_budget(const ToricLattice& lat) {
  if (lat.n_edges() > 12)
    throw std::invalid_argument("lattice too large for the dense engine (2k^2 > 12 qubits)");
}

inline PauliOp star_operator(const ToricLattice& lat, int s) {
  uint32_t mask = 0;
  for (int e : lat.star(s)) mask |= 1u << e;
  return PauliOp::x_on(lat.n_edges(), mask);
}

inline PauliOp plaquette_operator(const ToricLattice& lat, int p) {
  uint32_t mask = 0;
  for (int e : lat.bound(p)) mask |= 1u << e;
  return PauliOp::z_on(lat.n_edges(), mask);
}

// Terms (1 - A_s) for every vertex followed by (1 - B_p) for every face.
inline std::vector<LocalTerm> toric_hamiltonian_terms(const ToricLattice& lat) {
  check_dense_budget(lat);
  std::vector<LocalTerm> terms;
  for (int s = 0; s < lat.n_vertices(); ++s)
    terms.push_back(LocalTerm{1.0, -1.0, star_operator(lat, s)});
  for (int p = 0; p < lat.n_faces(); ++p)
    terms.push_back(LocalTerm{1.0, -1.0, plaquette_operator(lat, p)});
  return terms;
}

inline PauliSum toric_hamiltonian(const ToricLattice& lat) {
  PauliSum h;
  h.n_qubits = lat.n_edges();
  for (auto& t : toric_hamiltonian_terms(lat)) {
    h.constant += t.constant;
    PauliOp op = t.op;
    op.coeff *= t.prefactor;
    h.ops.push_back(op);
  }
  return h;
}

inline Matrix build_toric_hamiltonian(const ToricLattice& lat) {
  return toric_hamiltonian(lat).to_dense();
}

// The four noncontractible loop operators: Z1 on the horizontal row y=0,
// X1 on the vertical column of horizontal edges x=0 (they share edge (0,0,H)
// and anticommute); Z2 and X2 are the transposed pair sharing edge (0,0,V).
inline std::vector<Observable> logical_observables(const ToricLattice& lat) {
  check_dense_budget(lat);
  const int n = lat.n_edges();
  uint32_t z1 = 0, x1 = 0, z2 = 0, x2 = 0;
  for (int t = 0; t < lat.k(); ++t) {
    z1 |= 1u << lat.edge_index(t, 0, Orient::H);
    x1 |= 1u << lat.edge_index(0, t, Orient::H);
    z2 |= 1u << lat.edge_index(0, t, Orient::V);
    x2 |= 1u << lat.edge_index(t, 0, Orient::V);
  }
  return {Observable{"Z1", PauliOp::z_on(n, z1)}, Observable{"X1", PauliOp::x_on(n, x1)},
          Observable{"Z2", PauliOp::z_on(n, z2)}, Observable{"X2", PauliOp::x_on(n, x2)}};
}

// Ground state with all logical Z expectations +1: project |0...0> onto the
// +1 eigenspace of every star operator.
inline Vector toric_ground_state(const ToricLattice& lat) {
  check_dense_budget(lat);
  Vector psi = Vector::Zero(1 << lat.n_edges());
  psi[0] = 1.0;
  Vector tmp;
  for (int s = 0; s < lat.n_vertices(); ++s) {
    apply_pauli(star_operator(lat, s), psi, tmp);
    psi += tmp;
    psi.normalize();
  }
  return psi;
}

}  // namespace ftlab
