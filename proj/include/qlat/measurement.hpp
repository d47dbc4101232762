#pragma once

#include <string>
#include <vector>

#include "qlat/qcore.hpp"

namespace qlat {

// An n-letter word over {I, X, Y, Z}; letter 0 acts on qubit 0, the most
// significant index bit.
struct PauliWord {
  std::string letters;
};

struct PauliOp {
  PauliWord word;
  ComplexMatrix matrix;  // dense 2^n x 2^n
};

// All 4^n Pauli words in lexicographic order with I < X < Y < Z; the
// identity word is entry 0. Built once per n and cached.
const std::vector<PauliOp>& pauli_basis(int n_qubits);

// The 4^n - 1 non-identity words, in basis order; this is the layout of
// every measurement vector and of the dataset file header.
std::vector<std::string> measurement_word_order(int n_qubits);

// c_alpha = tr(rho P_alpha) for every non-identity word, in basis order.
// Traces of Hermitian products are real; imaginary residue is discarded.
std::vector<double> expectations(const DensityMatrix& rho);

// rho = (1/2^n) (I + sum_alpha x_alpha P_alpha); inverse of expectations.
// The result is Hermitian and unit trace by construction but positive only
// if x came from a physical state.
ComplexMatrix reconstruct(const std::vector<double>& x);

}  // namespace qlat
