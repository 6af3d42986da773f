#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "lightcone/pauli.hpp"
#include "lightcone/spin_sim.hpp"

using namespace lightcone::spin;
using Eigen::MatrixXcd;

namespace {

MatrixXcd single(char op) {
  MatrixXcd m(2, 2);
  const cplx i(0, 1);
  switch (op) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m = MatrixXcd::Identity(2, 2);
  }
  return m;
}

// Kronecker product with site 0 as the least significant bit.
MatrixXcd kron_label(const std::string& label) {
  MatrixXcd m = MatrixXcd::Identity(1, 1);
  for (char c : label) {
    MatrixXcd s = single(c);
    MatrixXcd out(m.rows() * 2, m.cols() * 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) out.block(a * m.rows(), b * m.cols(), m.rows(), m.cols()) = s(a, b) * m;
    m = out;
  }
  return m;
}

}  // namespace

TEST(Pauli, LabelRoundTrip) {
  auto p = PauliString::from_label("XIZY");
  EXPECT_EQ(p.label(4), "XIZY");
  EXPECT_EQ(p.rightmost_site(), 3);
  EXPECT_EQ(p.weight(), 3);
  EXPECT_EQ(PauliString{}.rightmost_site(), -1);
  EXPECT_THROW(PauliString::from_label("XQ"), std::invalid_argument);
}

TEST(Pauli, ProductsMatchMatrices) {
  const std::string ops = "IXYZ";
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int n = 0; n < 200; ++n) {
    std::string a(3, 'I'), b(3, 'I');
    for (int k = 0; k < 3; ++k) {
      a[k] = ops[pick(rng)];
      b[k] = ops[pick(rng)];
    }
    auto [ph, c] = multiply(PauliString::from_label(a), PauliString::from_label(b));
    MatrixXcd expect = kron_label(a) * kron_label(b);
    EXPECT_LT((expect - ph * kron_label(c.label(3))).cwiseAbs().maxCoeff(), 1e-14) << a << " * " << b;
    MatrixXcd comm = kron_label(a) * kron_label(b) - kron_label(b) * kron_label(a);
    EXPECT_EQ(anticommute(PauliString::from_label(a), PauliString::from_label(b)), comm.cwiseAbs().maxCoeff() > 1e-12);
  }
}

TEST(Pauli, DenseConversionMatchesKron) {
  PauliSum p(3);
  p.add(PauliString::from_label("XYZ"), cplx(0.5, -0.25));
  p.add(PauliString::from_label("IZI"), 2.0);
  p.add(PauliString::from_label("YII"), cplx(0, 1));
  MatrixXcd expect = cplx(0.5, -0.25) * kron_label("XYZ") + 2.0 * kron_label("IZI") + cplx(0, 1) * kron_label("YII");
  MatrixXcd got = pauli_to_dense(p);
  EXPECT_LT((got - expect).cwiseAbs().maxCoeff(), 1e-14);
  PauliSum back = dense_to_pauli(got, 3);
  EXPECT_EQ(back.size(), 3u);
  for (const auto& [q, c] : p.terms()) EXPECT_LT(std::abs(back.coefficient(q) - c), 1e-14);
}

TEST(Pauli, RandomDenseRoundTrip) {
  std::mt19937 rng(2);
  std::normal_distribution<double> g;
  MatrixXcd m(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) m(i, j) = cplx(g(rng), g(rng));
  MatrixXcd back = pauli_to_dense(dense_to_pauli(m, 4));
  EXPECT_LT((back - m).cwiseAbs().maxCoeff(), 1e-12);
}
