#pragma once

#include <Eigen/Dense>
#include <bit>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftlab {

using Cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// A weighted Pauli product P = coeff * (prod_{j in x_mask} X_j)(prod_{j in z_mask} Z_j).
// Action on a computational basis state: P|b> = coeff * (-1)^{|b & z_mask|} |b ^ x_mask>.
// Real coeff with disjoint masks (or pure-X / pure-Z content) keeps P Hermitian,
// which covers every operator this project needs.
struct PauliOp {
  int n_qubits = 0;
  uint32_t x_mask = 0;
  uint32_t z_mask = 0;
  Cxd coeff{1.0, 0.0};

  int dim() const { return 1 << n_qubits; }
  uint32_t support() const { return x_mask | z_mask; }

  Cxd phase(uint32_t b) const {
    return (std::popcount(b & z_mask) & 1) ? -coeff : coeff;
  }

  Matrix to_dense() const {
    Matrix m = Matrix::Zero(dim(), dim());
    for (uint32_t b = 0; b < static_cast<uint32_t>(dim()); ++b)
      m(b ^ x_mask, b) = phase(b);
    return m;
  }

  static PauliOp identity(int n) { return {n, 0, 0, Cxd{1.0, 0.0}}; }
  static PauliOp x_on(int n, uint32_t mask) { return {n, mask, 0, Cxd{1.0, 0.0}}; }
  static PauliOp z_on(int n, uint32_t mask) { return {n, 0, mask, Cxd{1.0, 0.0}}; }
};

namespace detail {

// Signs (-1)^{|b & z_mask|} for all basis states, shared across the column
// sweeps below.
inline void fill_phases(const PauliOp& p, uint32_t d, std::vector<Cxd>& phases) {
  phases.resize(d);
  for (uint32_t b = 0; b < d; ++b) phases[b] = p.phase(b);
}

}  // namespace detail

// out = P v
inline void apply_pauli(const PauliOp& p, const Vector& v, Vector& out) {
  const uint32_t d = static_cast<uint32_t>(v.size());
  out.resize(d);
  for (uint32_t b = 0; b < d; ++b) out[b ^ p.x_mask] = p.phase(b) * v[b];
}

// out += P m  (left multiplication; column-wise for the column-major layout)
inline void add_pauli_left(const PauliOp& p, const Matrix& m, Matrix& out) {
  const uint32_t d = static_cast<uint32_t>(m.rows());
  static thread_local std::vector<Cxd> phases;
  detail::fill_phases(p, d, phases);
  for (uint32_t j = 0; j < d; ++j) {
    const Cxd* src = m.col(j).data();
    Cxd* dst = out.col(j).data();
    for (uint32_t b = 0; b < d; ++b) dst[b ^ p.x_mask] += phases[b] * src[b];
  }
}

// out += m P  (right multiplication)
inline void add_pauli_right(const PauliOp& p, const Matrix& m, Matrix& out) {
  const uint32_t d = static_cast<uint32_t>(m.rows());
  static thread_local std::vector<Cxd> phases;
  detail::fill_phases(p, d, phases);
  for (uint32_t j = 0; j < d; ++j) out.col(j) += phases[j] * m.col(j ^ p.x_mask);
}

// out -= m P
inline void sub_pauli_right(const PauliOp& p, const Matrix& m, Matrix& out) {
  const uint32_t d = static_cast<uint32_t>(m.rows());
  static thread_local std::vector<Cxd> phases;
  detail::fill_phases(p, d, phases);
  for (uint32_t j = 0; j < d; ++j) out.col(j) -= phases[j] * m.col(j ^ p.x_mask);
}

// out = P m P†   (Hermitian P with |coeff| = 1 keeps this a conjugation)
inline void conjugate_pauli(const PauliOp& p, const Matrix& m, Matrix& out) {
  const uint32_t d = static_cast<uint32_t>(m.rows());
  out.resize(d, d);
  static thread_local std::vector<Cxd> phases;
  detail::fill_phases(p, d, phases);
  for (uint32_t j = 0; j < d; ++j) {
    const uint32_t sj = j ^ p.x_mask;
    const Cxd pj = std::conj(phases[sj]);
    const Cxd* src = m.col(sj).data();
    Cxd* dst = out.col(j).data();
    for (uint32_t b = 0; b < d; ++b) dst[b ^ p.x_mask] = phases[b] * pj * src[b];
  }
}

// trace(m P)
inline Cxd trace_with_pauli(const Matrix& m, const PauliOp& p) {
  Cxd acc{0.0, 0.0};
  const uint32_t d = static_cast<uint32_t>(m.rows());
  for (uint32_t b = 0; b < d; ++b) acc += m(b, b ^ p.x_mask) * p.phase(b);
  return acc;
}

// <v| P |v>
inline Cxd expectation_pauli(const PauliOp& p, const Vector& v) {
  Cxd acc{0.0, 0.0};
  const uint32_t d = static_cast<uint32_t>(v.size());
  for (uint32_t b = 0; b < d; ++b) acc += std::conj(v[b ^ p.x_mask]) * p.phase(b) * v[b];
  return acc;
}

// Hamiltonian given as a constant plus a sum of Pauli products.
struct PauliSum {
  int n_qubits = 0;
  double constant = 0.0;
  std::vector<PauliOp> ops;

  int dim() const { return 1 << n_qubits; }

  Matrix to_dense() const {
    Matrix m = Matrix::Identity(dim(), dim()) * constant;
    for (const auto& p : ops) m += p.to_dense();
    return m;
  }

  // out = H v
  void apply(const Vector& v, Vector& out) const {
    out = constant * v;
    Vector tmp;
    for (const auto& p : ops) {
      apply_pauli(p, v, tmp);
      out += tmp;
    }
  }

  // out = -i [H, m]; the constant part drops out of the commutator.
  void commutator_times_minus_i(const Matrix& m, Matrix& out) const {
    out.setZero(m.rows(), m.cols());
    for (const auto& p : ops) {
      add_pauli_left(p, m, out);
      sub_pauli_right(p, m, out);
    }
    out *= Cxd{0.0, -1.0};
  }
};

// A named Hermitian observable with a fast expectation path.
struct Observable {
  std::string label;
  PauliOp op;

  double expectation(const Matrix& rho) const {
    return trace_with_pauli(rho, op).real();
  }
  double expectation(const Vector& psi) const {
    return expectation_pauli(op, psi).real();
  }
};

}  // namespace ftlab
