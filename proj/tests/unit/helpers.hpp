#pragma once

#include "quantrel/operator_algebra.hpp"
#include "quantrel/scenario.hpp"

#include <Eigen/QR>

#include <cmath>
#include <random>

namespace testutil {

using namespace quantrel;

inline CMatrix random_complex(int d, std::mt19937& rng) {
  std::normal_distribution<double> g;
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline HermitianOperator random_hermitian(int d, std::mt19937& rng) {
  const CMatrix m = random_complex(d, rng);
  return HermitianOperator(CMatrix(0.5 * (m + m.adjoint())));
}

inline HermitianOperator random_density(int d, std::mt19937& rng) {
  const CMatrix m = random_complex(d, rng);
  CMatrix r = m * m.adjoint();
  r /= r.trace().real();
  return HermitianOperator(r);
}

inline CMatrix random_unitary(int d, std::mt19937& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_complex(d, rng));
  return qr.householderQ() * CMatrix::Identity(d, d);
}

inline std::array<double, 3> random_direction(std::mt19937& rng) {
  std::normal_distribution<double> g;
  double v[3] = {g(rng), g(rng), g(rng)};
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

inline MeasurementSet random_qubit_measurements(int m, std::mt19937& rng) {
  std::vector<std::array<double, 3>> dirs;
  for (int i = 0; i < m; ++i) dirs.push_back(random_direction(rng));
  return bloch_measurements(dirs);
}

// Sharp X/Z measurements mixed with white noise.
inline MeasurementSet noisy_xz(double eta) {
  const CMatrix id = CMatrix::Identity(2, 2);
  std::vector<std::vector<HermitianOperator>> eff;
  for (const CMatrix& s : {pauli_x().matrix(), pauli_z().matrix()}) {
    eff.push_back({HermitianOperator(CMatrix((id + eta * s) / 2.0)),
                   HermitianOperator(CMatrix((id - eta * s) / 2.0))});
  }
  return MeasurementSet(std::move(eff));
}

}  // namespace testutil
