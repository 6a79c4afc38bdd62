#include "ftlab/pauli.hpp"

#include <gtest/gtest.h>

#include "ftlab/rng.hpp"

using namespace ftlab;

namespace {

// Dense oracle built the slow way: explicit 2x2 matrices and Kronecker
// products, independent of the mask arithmetic under test.
Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix dense_pauli_oracle(const PauliOp& p) {
  const Matrix id2 = Matrix::Identity(2, 2);
  Matrix sx(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  Matrix acc = Matrix::Identity(1, 1);
  // Qubit 0 is the least significant bit, so it sits rightmost in the kron.
  for (int q = p.n_qubits - 1; q >= 0; --q) {
    Matrix factor = id2;
    if ((p.x_mask >> q) & 1) factor = sx * factor;
    if ((p.z_mask >> q) & 1) factor = factor * sz;  // X after Z on the same qubit
    acc = kron(acc, factor);
  }
  return p.coeff * acc;
}

Vector random_vector(int dim, RandomStream& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i)
    v[i] = Cxd(rng.next_double() - 0.5, rng.next_double() - 0.5);
  v.normalize();
  return v;
}

Matrix random_matrix(int dim, RandomStream& rng) {
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      m(i, j) = Cxd(rng.next_double() - 0.5, rng.next_double() - 0.5);
  return m;
}

PauliOp random_pauli(int n, RandomStream& rng) {
  PauliOp p;
  p.n_qubits = n;
  p.x_mask = static_cast<uint32_t>(rng.next_below(1u << n));
  p.z_mask = static_cast<uint32_t>(rng.next_below(1u << n));
  return p;
}

}  // namespace

TEST(PauliOp, DenseMatchesKroneckerOracle) {
  RandomStream rng(17);
  for (int n = 1; n <= 4; ++n)
    for (int rep = 0; rep < 8; ++rep) {
      const PauliOp p = random_pauli(n, rng);
      EXPECT_LT((p.to_dense() - dense_pauli_oracle(p)).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(PauliOp, ApplyMatchesDense) {
  RandomStream rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    const PauliOp p = random_pauli(3, rng);
    const Vector v = random_vector(8, rng);
    Vector fast;
    apply_pauli(p, v, fast);
    EXPECT_LT((fast - p.to_dense() * v).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(PauliOp, MatrixProductsMatchDense) {
  RandomStream rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    const PauliOp p = random_pauli(3, rng);
    const Matrix m = random_matrix(8, rng);
    const Matrix d = p.to_dense();

    Matrix left = Matrix::Zero(8, 8);
    add_pauli_left(p, m, left);
    EXPECT_LT((left - d * m).cwiseAbs().maxCoeff(), 1e-13);

    Matrix right = Matrix::Zero(8, 8);
    add_pauli_right(p, m, right);
    EXPECT_LT((right - m * d).cwiseAbs().maxCoeff(), 1e-13);

    Matrix conj;
    conjugate_pauli(p, m, conj);
    EXPECT_LT((conj - d * m * d.adjoint()).cwiseAbs().maxCoeff(), 1e-13);

    EXPECT_NEAR(std::abs(trace_with_pauli(m, p) - (m * d).trace()), 0.0, 1e-13);
  }
}

TEST(PauliOp, ExpectationMatchesDense) {
  RandomStream rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    PauliOp p = random_pauli(3, rng);
    p.z_mask &= ~p.x_mask;  // Hermitian (disjoint masks)
    const Vector v = random_vector(8, rng);
    const Cxd direct = expectation_pauli(p, v);
    const Cxd oracle = (v.adjoint() * p.to_dense() * v)(0, 0);
    EXPECT_NEAR(std::abs(direct - oracle), 0.0, 1e-13);
  }
}

TEST(PauliSum, ApplyAndCommutatorMatchDense) {
  RandomStream rng(37);
  PauliSum h;
  h.n_qubits = 3;
  h.constant = 0.75;
  for (int i = 0; i < 4; ++i) {
    PauliOp p = random_pauli(3, rng);
    p.z_mask &= ~p.x_mask;
    p.coeff = Cxd(rng.next_double() - 0.5, 0.0);
    h.ops.push_back(p);
  }
  const Matrix hd = h.to_dense();
  const Vector v = random_vector(8, rng);
  Vector hv;
  h.apply(v, hv);
  EXPECT_LT((hv - hd * v).cwiseAbs().maxCoeff(), 1e-13);

  const Matrix rho = random_matrix(8, rng);
  Matrix comm;
  h.commutator_times_minus_i(rho, comm);
  const Matrix oracle = Cxd(0, -1) * (hd * rho - rho * hd);
  EXPECT_LT((comm - oracle).cwiseAbs().maxCoeff(), 1e-12);
}
