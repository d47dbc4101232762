#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qlat/measurement.hpp"
#include "qlat/model.hpp"
#include "qlat/qcore.hpp"
#include "qlat/rng.hpp"
#include "test_helpers.hpp"

namespace qlat {
namespace {

using testutil::basis_state;

ComplexMatrix cnot01() {
  ComplexMatrix m(4, 4);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  m(2, 3) = 1.0;
  m(3, 2) = 1.0;
  return m;
}

ComplexMatrix rx(double t) {
  ComplexMatrix m(2, 2);
  m(0, 0) = std::cos(t / 2);
  m(1, 1) = std::cos(t / 2);
  m(0, 1) = cplx(0.0, -std::sin(t / 2));
  m(1, 0) = cplx(0.0, -std::sin(t / 2));
  return m;
}

// Determinant by Gaussian elimination with partial pivoting.
cplx determinant(ComplexMatrix m) {
  cplx det = 1.0;
  const int n = m.rows;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    if (std::abs(m(pivot, col)) == 0.0) return 0.0;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(m(pivot, c), m(col, c));
      det = -det;
    }
    det *= m(col, col);
    for (int r = col + 1; r < n; ++r) {
      const cplx f = m(r, col) / m(col, col);
      for (int c = col; c < n; ++c) m(r, c) -= f * m(col, c);
    }
  }
  return det;
}

std::vector<double> random_input(Rng& rng) {
  std::vector<double> x(15);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

std::vector<double> random_angles(Rng& rng) {
  std::vector<double> a(kNumAngles);
  for (double& v : a) v = rng.uniform(-3.14159, 3.14159);
  return a;
}

// Kraus set of the single-qubit depolarizing channel on one qubit of two.
std::vector<ComplexMatrix> depolarizing_kraus(int qubit, double p) {
  ComplexMatrix i2 = ComplexMatrix::identity(2);
  ComplexMatrix x(2, 2), y(2, 2), z(2, 2);
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  y(0, 1) = cplx(0.0, -1.0);
  y(1, 0) = cplx(0.0, 1.0);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  const ComplexMatrix ops[4] = {i2, x, y, z};
  std::vector<ComplexMatrix> out;
  for (int k = 0; k < 4; ++k) {
    const double w = (k == 0) ? 1.0 - 0.75 * p : 0.25 * p;
    const ComplexMatrix full =
        (qubit == 0) ? tensor(ops[k], i2) : tensor(i2, ops[k]);
    out.push_back(std::sqrt(w) * full);
  }
  return out;
}

double relu(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

TEST_CASE("encoder forward pass") {
  const ModelArch tiny{3, 4, 3, 2};

  SUBCASE("all-zero weights output the final bias") {
    Rng rng(1);
    ModelParams p = init_params(rng, DecoderMode::Corrected, tiny);
    std::fill(p.enc.w1.a.begin(), p.enc.w1.a.end(), 0.0);
    std::fill(p.enc.w2.a.begin(), p.enc.w2.a.end(), 0.0);
    std::fill(p.enc.w3.a.begin(), p.enc.w3.a.end(), 0.0);
    p.enc.b3 = {0.4, -1.7};
    const std::vector<double> z = encode({1.0, 2.0, 3.0}, p.enc);
    REQUIRE(z.size() == 2);
    CHECK(z[0] == 0.4);
    CHECK(z[1] == -1.7);
  }

  SUBCASE("negative first-layer biases kill the first layer") {
    Rng rng(2);
    ModelParams p = init_params(rng, DecoderMode::Corrected, tiny);
    std::fill(p.enc.w1.a.begin(), p.enc.w1.a.end(), 0.0);
    p.enc.b1 = {-1.0, -2.0, -0.5, -3.0};
    const std::vector<double> z = encode({0.3, -0.7, 0.9}, p.enc);
    // Hand-rolled h2 = ReLU(b2), z = W3 h2 + b3.
    std::vector<double> h2(3);
    for (int i = 0; i < 3; ++i) h2[static_cast<size_t>(i)] = relu(p.enc.b2[static_cast<size_t>(i)]);
    for (int i = 0; i < 2; ++i) {
      double want = p.enc.b3[static_cast<size_t>(i)];
      for (int j = 0; j < 3; ++j) want += p.enc.w3(i, j) * h2[static_cast<size_t>(j)];
      CHECK(z[static_cast<size_t>(i)] == doctest::Approx(want).epsilon(1e-15));
    }
  }

  SUBCASE("directional derivatives match finite differences") {
    Rng rng(3);
    const ModelParams p = init_params(rng, DecoderMode::Corrected, {15, 8, 6, 4});
    const std::vector<double> x = random_input(rng);
    const EncoderContext ctx = encode_ctx(x, p.enc);

    const double h = 1e-6;
    for (int k = 0; k < 15; ++k) {
      // Jacobian-vector product from the ReLU masks of the context.
      std::vector<double> d1(8, 0.0);
      for (int i = 0; i < 8; ++i)
        if (ctx.a1[static_cast<size_t>(i)] > 0.0) d1[static_cast<size_t>(i)] = p.enc.w1(i, k);
      std::vector<double> d2(6, 0.0);
      for (int i = 0; i < 6; ++i) {
        if (ctx.a2[static_cast<size_t>(i)] <= 0.0) continue;
        for (int j = 0; j < 8; ++j) d2[static_cast<size_t>(i)] += p.enc.w2(i, j) * d1[static_cast<size_t>(j)];
      }
      std::vector<double> jvp(4, 0.0);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j) jvp[static_cast<size_t>(i)] += p.enc.w3(i, j) * d2[static_cast<size_t>(j)];

      std::vector<double> xp = x, xm = x;
      xp[static_cast<size_t>(k)] += h;
      xm[static_cast<size_t>(k)] -= h;
      const std::vector<double> zp = encode(xp, p.enc);
      const std::vector<double> zm = encode(xm, p.enc);
      for (int i = 0; i < 4; ++i) {
        const double fd = (zp[static_cast<size_t>(i)] - zm[static_cast<size_t>(i)]) / (2 * h);
        const double scale = std::max({std::abs(fd), std::abs(jvp[static_cast<size_t>(i)]), 1e-8});
        CHECK(std::abs(fd - jvp[static_cast<size_t>(i)]) / scale <= 1e-4);
      }
    }
  }

  SUBCASE("shape mismatch is rejected") {
    Rng rng(4);
    const ModelParams p = init_params(rng, DecoderMode::Corrected, tiny);
    CHECK_THROWS_AS(encode({1.0, 2.0}, p.enc), std::invalid_argument);
  }
}

TEST_CASE("latent map is affine") {
  Rng rng(5);
  const ModelParams p = init_params(rng, DecoderMode::Corrected, {15, 8, 6, 4});

  SUBCASE("zero latent returns the bias") {
    const CircuitParams t = latent_to_params({0, 0, 0, 0}, p.map, DecoderMode::Corrected);
    REQUIRE(t.angles.size() == 36);
    REQUIRE(t.noise_logits.size() == 2);
    for (int i = 0; i < 36; ++i) CHECK(t.angles[static_cast<size_t>(i)] == p.map.b4[static_cast<size_t>(i)]);
    CHECK(t.noise_logits[0] == p.map.b4[36]);
    CHECK(t.noise_logits[1] == p.map.b4[37]);
  }

  SUBCASE("affine combination identity") {
    const std::vector<double> z1 = {0.3, -1.2, 0.8, 0.1};
    const std::vector<double> z2 = {-0.5, 0.4, 1.5, -0.9};
    const double a = 0.7, b = -1.3;
    std::vector<double> mix(4);
    for (int i = 0; i < 4; ++i) mix[static_cast<size_t>(i)] = a * z1[static_cast<size_t>(i)] + b * z2[static_cast<size_t>(i)];
    const CircuitParams t1 = latent_to_params(z1, p.map, DecoderMode::Corrected);
    const CircuitParams t2 = latent_to_params(z2, p.map, DecoderMode::Corrected);
    const CircuitParams tm = latent_to_params(mix, p.map, DecoderMode::Corrected);
    for (int i = 0; i < 36; ++i) {
      const double want = a * (t1.angles[static_cast<size_t>(i)] - p.map.b4[static_cast<size_t>(i)]) +
                          b * (t2.angles[static_cast<size_t>(i)] - p.map.b4[static_cast<size_t>(i)]) +
                          p.map.b4[static_cast<size_t>(i)];
      CHECK(tm.angles[static_cast<size_t>(i)] == doctest::Approx(want).epsilon(1e-12));
    }
  }

  SUBCASE("literal mode emits no logits") {
    Rng r2(6);
    const ModelParams lit = init_params(r2, DecoderMode::Literal, {15, 8, 6, 4});
    const CircuitParams t =
        latent_to_params({0.1, 0.2, 0.3, 0.4}, lit.map, DecoderMode::Literal);
    CHECK(t.angles.size() == 36);
    CHECK(t.noise_logits.empty());
  }

  SUBCASE("row-count mismatch with the mode is rejected") {
    CHECK_THROWS_AS(latent_to_params({0.1, 0.2, 0.3, 0.4}, p.map, DecoderMode::Literal),
                    std::invalid_argument);
  }
}

TEST_CASE("circuit unitary") {
  SUBCASE("all-zero angles collapse to the identity") {
    const ComplexMatrix u = build_unitary(std::vector<double>(36, 0.0));
    CHECK(max_abs_diff(u, ComplexMatrix::identity(4)) < 1e-14);
  }

  SUBCASE("single first-layer RX is CNOT-sandwiched") {
    const double t = 1.234;
    std::vector<double> angles(36, 0.0);
    angles[0] = t;  // layer 0, qubit 0, RX
    const ComplexMatrix u = build_unitary(angles);
    const ComplexMatrix want =
        cnot01() * tensor(rx(t), ComplexMatrix::identity(2)) * cnot01();
    CHECK(max_abs_diff(u, want) < 1e-14);
    CHECK(std::abs(std::abs(determinant(u)) - 1.0) < 1e-12);
  }

  SUBCASE("unitarity holds for random angles") {
    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
      const ComplexMatrix u = build_unitary(random_angles(rng));
      CHECK(frobenius_norm(adjoint(u) * u - ComplexMatrix::identity(4)) <= 1e-10);
    }
  }

  SUBCASE("angle count is enforced") {
    CHECK_THROWS_AS(build_unitary(std::vector<double>(35, 0.0)), std::invalid_argument);
  }
}

TEST_CASE("single-qubit depolarization") {
  Rng rng(8);

  SUBCASE("matches the Kraus oracle on both qubits") {
    for (double p : {0.0, 0.2, 0.7, 1.0}) {
      for (int qubit : {0, 1}) {
        const DensityMatrix rho = testutil::random_density(rng);
        const DensityMatrix direct = depolarize_qubit(rho, qubit, p);
        const DensityMatrix oracle = apply_kraus(rho, depolarizing_kraus(qubit, p));
        CHECK(max_abs_diff(direct.mat, oracle.mat) < 1e-12);
      }
    }
  }

  SUBCASE("affine in the probability") {
    const DensityMatrix rho = testutil::random_density(rng);
    const double p = 0.37;
    const ComplexMatrix lo = depolarize_qubit(rho, 0, 0.0).mat;
    const ComplexMatrix hi = depolarize_qubit(rho, 0, 1.0).mat;
    const ComplexMatrix mix = depolarize_qubit(rho, 0, p).mat;
    CHECK(max_abs_diff(mix, (1.0 - p) * lo + p * hi) < 1e-14);
  }

  SUBCASE("p=1 output is I/2 on the mixed qubit") {
    const DensityMatrix rho = testutil::random_pure(rng);
    const ComplexMatrix out = depolarize_qubit(rho, 1, 1.0).mat;
    CHECK(max_abs_diff(out, qubit_mix(rho.mat, 1)) < 1e-14);
    // Partial trace over qubit 0 of the result equals I/2 structure: the
    // (0,1) block coherences within qubit 1 vanish.
    CHECK(std::abs(out(0, 1)) < 1e-12);
    CHECK(std::abs(out(2, 3)) < 1e-12);
  }

  SUBCASE("probability range is enforced") {
    const DensityMatrix rho = testutil::random_density(rng);
    CHECK_THROWS_AS(depolarize_qubit(rho, 0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(depolarize_qubit(rho, 0, 1.1), std::invalid_argument);
  }
}

TEST_CASE("decoder modes") {
  Rng rng(9);

  SUBCASE("literal mode is constant at the maximally mixed state") {
    for (int trial = 0; trial < 100; ++trial) {
      CircuitParams t;
      t.angles = random_angles(rng);
      const DensityMatrix out = decode(t, DecoderMode::Literal);
      CHECK(max_abs_diff(out.mat, 0.25 * ComplexMatrix::identity(4)) < 1e-12);
      for (double v : expectations(out)) CHECK(std::abs(v) <= 1e-12);
    }
  }

  SUBCASE("corrected mode with zero angles and zero noise is |00><00|") {
    CircuitParams t;
    t.angles.assign(36, 0.0);
    t.noise_logits = {-40.0, -40.0};  // sigmoid(-40) ~ 4e-18
    const DensityMatrix out = decode(t, DecoderMode::Corrected);
    CHECK(max_abs_diff(out.mat, basis_state(4, 0).mat) < 1e-12);
  }

  SUBCASE("corrected mode with unit noise is maximally mixed") {
    CircuitParams t;
    t.angles = random_angles(rng);
    t.noise_logits = {40.0, 40.0};  // sigmoid(40) ~ 1 - 4e-18
    const DensityMatrix out = decode(t, DecoderMode::Corrected);
    CHECK(max_abs_diff(out.mat, 0.25 * ComplexMatrix::identity(4)) < 1e-12);
  }

  SUBCASE("corrected mode matches the unitary-plus-Kraus oracle") {
    for (int trial = 0; trial < 20; ++trial) {
      CircuitParams t;
      t.angles = random_angles(rng);
      t.noise_logits = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
      const DensityMatrix out = decode(t, DecoderMode::Corrected);

      const ComplexMatrix u = build_unitary(t.angles);
      DensityMatrix oracle{hermitized(u * basis_state(4, 0).mat * adjoint(u))};
      oracle = apply_kraus(oracle, depolarizing_kraus(0, sigmoid(t.noise_logits[0])));
      oracle = apply_kraus(oracle, depolarizing_kraus(1, sigmoid(t.noise_logits[1])));
      CHECK(max_abs_diff(out.mat, oracle.mat) < 1e-12);
      CHECK(std::abs(purity(out) - purity(oracle)) < 1e-9);
      CHECK(validate_density(out.mat).ok);
    }
  }

  SUBCASE("missing logits are rejected in corrected mode") {
    CircuitParams t;
    t.angles.assign(36, 0.0);
    CHECK_THROWS_AS(decode(t, DecoderMode::Corrected), std::invalid_argument);
  }
}

TEST_CASE("sigmoid endpoints and symmetry") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(40.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sigmoid(-40.0) == doctest::Approx(0.0).scale(1).epsilon(1e-15));
  CHECK(sigmoid(1.3) + sigmoid(-1.3) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("full forward pass") {
  Rng rng(10);

  SUBCASE("literal mode predicts the zero vector for every input") {
    const ModelParams p = init_params(rng, DecoderMode::Literal, {15, 8, 6, 4});
    for (int trial = 0; trial < 100; ++trial) {
      const ForwardResult r = forward(random_input(rng), p);
      for (double v : r.x_hat) CHECK(std::abs(v) <= 1e-12);
    }
  }

  SUBCASE("zeroed weights give an input-independent prediction") {
    ModelParams p = init_params(rng, DecoderMode::Corrected, {15, 8, 6, 4});
    std::fill(p.enc.w1.a.begin(), p.enc.w1.a.end(), 0.0);
    std::fill(p.enc.b1.begin(), p.enc.b1.end(), 0.0);
    const ForwardResult r1 = forward(random_input(rng), p);
    const ForwardResult r2 = forward(random_input(rng), p);
    CHECK(max_abs_diff(r1.rho_pred.mat, r2.rho_pred.mat) == 0.0);
  }

  SUBCASE("predicted expectations are Pauli-bounded and the state is valid") {
    const ModelParams p = init_params(rng, DecoderMode::Corrected, {15, 8, 6, 4});
    for (int trial = 0; trial < 50; ++trial) {
      const ForwardResult r = forward(random_input(rng), p);
      CHECK(validate_density(r.rho_pred.mat).ok);
      REQUIRE(r.x_hat.size() == 15);
      for (double v : r.x_hat) {
        CHECK(v >= -1.0 - 1e-9);
        CHECK(v <= 1.0 + 1e-9);
      }
    }
  }
}

TEST_CASE("parameter initialization statistics") {
  Rng rng(11);
  const ModelParams p = init_params(rng, DecoderMode::Corrected);

  SUBCASE("biases are zero") {
    for (double v : p.enc.b1) CHECK(v == 0.0);
    for (double v : p.enc.b2) CHECK(v == 0.0);
    for (double v : p.enc.b3) CHECK(v == 0.0);
    for (double v : p.map.b4) CHECK(v == 0.0);
  }

  SUBCASE("weight variances follow the fan-in rule") {
    const auto sample_var = [](const RealMatrix& m) {
      double mean = 0.0;
      for (double v : m.a) mean += v;
      mean /= static_cast<double>(m.a.size());
      double var = 0.0;
      for (double v : m.a) var += (v - mean) * (v - mean);
      return var / static_cast<double>(m.a.size() - 1);
    };
    CHECK(sample_var(p.enc.w1) == doctest::Approx(2.0 / 15).epsilon(0.20));
    CHECK(sample_var(p.enc.w2) == doctest::Approx(2.0 / 256).epsilon(0.20));
    CHECK(sample_var(p.enc.w3) == doctest::Approx(2.0 / 128).epsilon(0.20));
    CHECK(sample_var(p.map.w4) == doctest::Approx(1.0 / 20).epsilon(0.20));
  }

  SUBCASE("fixed seed reproduces the draw") {
    Rng a(77), b(77);
    const std::vector<double> fa = to_flat(init_params(a, DecoderMode::Corrected));
    const std::vector<double> fb = to_flat(init_params(b, DecoderMode::Corrected));
    CHECK(fa == fb);
  }

  SUBCASE("shapes track the architecture and mode") {
    CHECK(p.enc.w1.rows == 256);
    CHECK(p.enc.w1.cols == 15);
    CHECK(p.map.w4.rows == 38);
    CHECK(p.map.w4.cols == 20);
    CHECK(p.theta_dim() == 38);
    Rng r2(12);
    const ModelParams lit = init_params(r2, DecoderMode::Literal);
    CHECK(lit.map.w4.rows == 36);
    CHECK(lit.theta_dim() == 36);
    CHECK(theta_dim_for(DecoderMode::Literal) == 36);
    CHECK(theta_dim_for(DecoderMode::Corrected) == 38);
  }
}

TEST_CASE("flat parameter layout") {
  const ModelArch tiny{3, 4, 3, 2};
  Rng rng(13);

  SUBCASE("counts for the default and tiny architectures") {
    CHECK(param_count({}, DecoderMode::Literal) == 40328);
    CHECK(param_count({}, DecoderMode::Corrected) == 40370);
    // 12 + 4 + 12 + 3 + 6 + 2 + 72 + 36 for the tiny literal model; the
    // corrected map has two extra rows of W4 (2 cols each) and two biases.
    CHECK(param_count(tiny, DecoderMode::Literal) == 147);
    CHECK(param_count(tiny, DecoderMode::Corrected) == 153);
  }

  SUBCASE("round trip is exact") {
    const ModelParams p = init_params(rng, DecoderMode::Corrected, tiny);
    const std::vector<double> flat = to_flat(p);
    REQUIRE(static_cast<int>(flat.size()) == param_count(tiny, DecoderMode::Corrected));
    const ModelParams q = from_flat(flat, tiny, DecoderMode::Corrected);
    CHECK(to_flat(q) == flat);
    CHECK(q.arch().input == 3);
    CHECK(q.arch().latent == 2);
  }

  SUBCASE("blocks appear in declaration order") {
    ModelParams p = init_params(rng, DecoderMode::Literal, tiny);
    p.enc.w1(0, 0) = 101.0;               // flat[0]
    p.enc.b1[0] = 102.0;                  // flat[12]
    p.enc.w2(0, 0) = 103.0;               // flat[16]
    p.enc.b2[0] = 104.0;                  // flat[28]
    p.enc.w3(0, 0) = 105.0;               // flat[31]
    p.enc.b3[0] = 106.0;                  // flat[37]
    p.map.w4(0, 0) = 107.0;               // flat[39]
    p.map.b4[0] = 108.0;                  // flat[111]
    const std::vector<double> flat = to_flat(p);
    CHECK(flat[0] == 101.0);
    CHECK(flat[12] == 102.0);
    CHECK(flat[16] == 103.0);
    CHECK(flat[28] == 104.0);
    CHECK(flat[31] == 105.0);
    CHECK(flat[37] == 106.0);
    CHECK(flat[39] == 107.0);
    CHECK(flat[111] == 108.0);
  }

  SUBCASE("size mismatch is rejected") {
    const ModelParams p = init_params(rng, DecoderMode::Corrected, tiny);
    std::vector<double> flat = to_flat(p);
    flat.pop_back();
    CHECK_THROWS_AS(from_flat(flat, tiny, DecoderMode::Corrected), std::invalid_argument);
  }
}

}  // namespace qlat
