#include "qlat/measurement.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace qlat {

namespace {

const ComplexMatrix& pauli_letter(char c) {
  static const ComplexMatrix kI = [] {
    ComplexMatrix m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    return m;
  }();
  static const ComplexMatrix kX = [] {
    ComplexMatrix m(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
  }();
  static const ComplexMatrix kY = [] {
    ComplexMatrix m(2, 2);
    m(0, 1) = cplx(0.0, -1.0);
    m(1, 0) = cplx(0.0, 1.0);
    return m;
  }();
  static const ComplexMatrix kZ = [] {
    ComplexMatrix m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
  }();
  switch (c) {
    case 'I': return kI;
    case 'X': return kX;
    case 'Y': return kY;
    case 'Z': return kZ;
  }
  throw std::invalid_argument("pauli_letter: unknown letter");
}

int qubits_from_dim(int dim) {
  int n = 0;
  int d = 1;
  while (d < dim) {
    d *= 2;
    ++n;
  }
  if (d != dim || n == 0)
    throw std::invalid_argument("dimension is not a power of two >= 2");
  return n;
}

}  // namespace

const std::vector<PauliOp>& pauli_basis(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 8)
    throw std::invalid_argument("pauli_basis: n_qubits out of range");
  static std::mutex mu;
  static std::map<int, std::vector<PauliOp>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n_qubits);
  if (it != cache.end()) return it->second;

  const char kLetters[] = {'I', 'X', 'Y', 'Z'};
  std::vector<PauliOp> basis;
  const int count = 1 << (2 * n_qubits);  // 4^n
  basis.reserve(count);
  for (int idx = 0; idx < count; ++idx) {
    std::string word(n_qubits, 'I');
    // Base-4 digits, most significant first, so the enumeration order is
    // the lexicographic order of the words.
    for (int pos = 0; pos < n_qubits; ++pos) {
      const int shift = 2 * (n_qubits - 1 - pos);
      word[pos] = kLetters[(idx >> shift) & 3];
    }
    ComplexMatrix m = pauli_letter(word[0]);
    for (int pos = 1; pos < n_qubits; ++pos)
      m = tensor(m, pauli_letter(word[pos]));
    basis.push_back(PauliOp{PauliWord{word}, std::move(m)});
  }
  return cache.emplace(n_qubits, std::move(basis)).first->second;
}

std::vector<std::string> measurement_word_order(int n_qubits) {
  const std::vector<PauliOp>& basis = pauli_basis(n_qubits);
  std::vector<std::string> words;
  words.reserve(basis.size() - 1);
  for (size_t i = 1; i < basis.size(); ++i) words.push_back(basis[i].word.letters);
  return words;
}

std::vector<double> expectations(const DensityMatrix& rho) {
  const int n = qubits_from_dim(rho.dim());
  const std::vector<PauliOp>& basis = pauli_basis(n);
  std::vector<double> x;
  x.reserve(basis.size() - 1);
  const int d = rho.dim();
  for (size_t alpha = 1; alpha < basis.size(); ++alpha) {
    const ComplexMatrix& p = basis[alpha].matrix;
    double val = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        val += std::real(rho.mat(i, j) * p(j, i));
    x.push_back(val);
  }
  return x;
}

ComplexMatrix reconstruct(const std::vector<double>& x) {
  int n = 0;
  size_t count = 0;
  while (count < x.size()) {
    ++n;
    count = (size_t(1) << (2 * n)) - 1;
  }
  if (count != x.size() || n == 0)
    throw std::invalid_argument("reconstruct: size is not 4^n - 1");
  const std::vector<PauliOp>& basis = pauli_basis(n);
  const int d = 1 << n;
  const double norm = 1.0 / d;
  ComplexMatrix rho(d, d);
  for (int i = 0; i < d; ++i) rho(i, i) = norm;
  for (size_t alpha = 1; alpha < basis.size(); ++alpha) {
    const double c = x[alpha - 1] * norm;
    if (c == 0.0) continue;
    const ComplexMatrix& p = basis[alpha].matrix;
    for (size_t k = 0; k < rho.a.size(); ++k) rho.a[k] += c * p.a[k];
  }
  return rho;
}

}  // namespace qlat
