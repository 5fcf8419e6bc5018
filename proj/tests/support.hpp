#pragma once

#include <random>

#include "pom/gaussian.hpp"

namespace pom::test {

inline double max_abs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

// Product of random rotations, squeezers and beamsplitters.
inline SymplecticOp random_symplectic(int n, std::mt19937_64& rng, double max_r = 1.0) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi), sq(-max_r, max_r);
  std::uniform_int_distribution<int> pick(0, n - 1);
  SymplecticOp s = identity_op(n);
  for (int k = 0; k < 3 * n; ++k) {
    const int a = pick(rng);
    s.matrix = embed(make_rotation(ang(rng)), {a}, n).matrix * s.matrix;
    s.matrix = embed(make_squeezer(sq(rng)), {a}, n).matrix * s.matrix;
    if (n > 1) {
      int b = pick(rng);
      while (b == a) b = pick(rng);
      s.matrix = embed(make_beamsplitter(ang(rng), ang(rng)), {a, b}, n).matrix * s.matrix;
    }
  }
  return s;
}

// S diag(nu_k) S^T with every nu_k >= 1/2.
inline GaussianState random_state(int n, std::mt19937_64& rng, double max_r = 1.0, double max_n = 3.0) {
  std::uniform_real_distribution<double> occ(0.0, max_n), mu(-2.0, 2.0);
  Mat d = Mat::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) d(2 * k, 2 * k) = d(2 * k + 1, 2 * k + 1) = 0.5 + occ(rng);
  const SymplecticOp s = random_symplectic(n, rng, max_r);
  Vec mean(2 * n);
  for (int k = 0; k < 2 * n; ++k) mean(k) = mu(rng);
  Mat cov = s.matrix * d * s.matrix.transpose();
  cov = 0.5 * (cov + cov.transpose());
  return {n, mean, cov};
}

}  // namespace pom::test
