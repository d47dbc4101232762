#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "qlat/measurement.hpp"
#include "qlat/qcore.hpp"
#include "qlat/rng.hpp"
#include "test_helpers.hpp"

namespace qlat {
namespace {

using testutil::basis_state;
using testutil::random_density;
using testutil::random_pure;

// Bell state (|00> + |11>)/sqrt(2).
DensityMatrix bell_phi_plus() {
  ComplexMatrix m(4, 4);
  m(0, 0) = 0.5;
  m(0, 3) = 0.5;
  m(3, 0) = 0.5;
  m(3, 3) = 0.5;
  return DensityMatrix{m};
}

double word_expectation(const std::vector<std::string>& order,
                        const std::vector<double>& x, const std::string& word) {
  for (size_t i = 0; i < order.size(); ++i)
    if (order[i] == word) return x[i];
  FAIL("word not found: ", word);
  return 0.0;
}

}  // namespace

TEST_CASE("basis enumeration is lexicographic with I < X < Y < Z") {
  const std::vector<std::string> order = measurement_word_order(2);
  REQUIRE(order.size() == 15);
  const std::vector<std::string> expect = {"IX", "IY", "IZ", "XI", "XX",
                                           "XY", "XZ", "YI", "YX", "YY",
                                           "YZ", "ZI", "ZX", "ZY", "ZZ"};
  CHECK(order == expect);

  const std::vector<PauliOp>& basis = pauli_basis(2);
  REQUIRE(basis.size() == 16);
  CHECK(basis[0].word.letters == "II");
  for (size_t i = 0; i < order.size(); ++i)
    CHECK(basis[i + 1].word.letters == order[i]);

  // Single-qubit sanity: 4 words, identity first.
  const std::vector<std::string> one = measurement_word_order(1);
  CHECK(one == std::vector<std::string>{"X", "Y", "Z"});
}

TEST_CASE("basis matrices square to identity and are traceless off identity") {
  const std::vector<PauliOp>& basis = pauli_basis(2);
  for (const PauliOp& op : basis) {
    CHECK(max_abs_diff(op.matrix * op.matrix, ComplexMatrix::identity(4)) < 1e-15);
    const double tr = std::real(trace(op.matrix));
    if (op.word.letters == "II")
      CHECK(tr == doctest::Approx(4.0));
    else
      CHECK(std::abs(tr) < 1e-15);
    CHECK(hermiticity_defect(op.matrix) < 1e-15);
  }
}

TEST_CASE("expectations of computational and Bell states") {
  SUBCASE("|00><00| has ZI = IZ = ZZ = 1 and no X/Y components") {
    const std::vector<std::string> order = measurement_word_order(2);
    const std::vector<double> x = expectations(basis_state(4, 0));
    REQUIRE(x.size() == 15);
    for (size_t i = 0; i < order.size(); ++i) {
      const std::string& w = order[i];
      const bool z_only = w.find('X') == std::string::npos &&
                          w.find('Y') == std::string::npos;
      if (z_only)
        CHECK(x[i] == doctest::Approx(1.0).epsilon(1e-14));
      else
        CHECK(std::abs(x[i]) < 1e-14);
    }
  }

  SUBCASE("Bell state has XX = ZZ = 1, YY = -1, single-qubit terms zero") {
    const std::vector<std::string> order = measurement_word_order(2);
    const std::vector<double> x = expectations(bell_phi_plus());
    CHECK(word_expectation(order, x, "XX") == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(word_expectation(order, x, "YY") == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(word_expectation(order, x, "ZZ") == doctest::Approx(1.0).epsilon(1e-14));
    for (const char* w : {"IX", "IY", "IZ", "XI", "YI", "ZI"})
      CHECK(std::abs(word_expectation(order, x, w)) < 1e-14);
  }

  SUBCASE("maximally mixed state has all components zero") {
    const DensityMatrix mixed{0.25 * ComplexMatrix::identity(4)};
    for (double v : expectations(mixed)) CHECK(std::abs(v) < 1e-15);
  }
}

TEST_CASE("reconstruction inverts expectations") {
  Rng rng(3301);
  for (int trial = 0; trial < 1000; ++trial) {
    const DensityMatrix rho =
        (trial % 4 == 0) ? random_pure(rng) : random_density(rng);
    const std::vector<double> x = expectations(rho);
    const ComplexMatrix back = reconstruct(x);
    CHECK(max_abs_diff(back, rho.mat) < 1e-10);
  }
}

TEST_CASE("component norm matches purity") {
  // tr(rho^2) = (1 + sum_alpha x_alpha^2) / 4 for two qubits.
  Rng rng(3302);
  for (int trial = 0; trial < 1000; ++trial) {
    const DensityMatrix rho = random_density(rng);
    double norm2 = 0.0;
    for (double v : expectations(rho)) norm2 += v * v;
    CHECK(std::abs((1.0 + norm2) / 4.0 - purity(rho)) < 1e-9);
  }
}

TEST_CASE("reconstruction of unphysical vectors is Hermitian unit trace") {
  std::vector<double> x(15, 0.9);  // far outside the Bloch body
  const ComplexMatrix m = reconstruct(x);
  CHECK(std::abs(std::real(trace(m)) - 1.0) < 1e-14);
  CHECK(std::abs(std::imag(trace(m))) < 1e-14);
  CHECK(hermiticity_defect(m) < 1e-14);
  CHECK_FALSE(validate_density(m).ok);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(expectations(basis_state(3, 0)), std::invalid_argument);
  CHECK_THROWS_AS(reconstruct(std::vector<double>(14, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(measurement_word_order(0), std::invalid_argument);

  // One qubit is a legitimate size: 3 components, Z = 1 for |0><0|.
  const std::vector<double> x = expectations(basis_state(2, 0));
  REQUIRE(x.size() == 3);
  CHECK(x[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs_diff(reconstruct(x), basis_state(2, 0).mat) < 1e-14);
}

}  // namespace qlat
