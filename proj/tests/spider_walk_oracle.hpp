#pragma once

// Exact m-step walk density on the three-spider by repeated numerical
// convolution of the one-step kernel: same axis g_s(w-u), other axes
// (1/2) g_s(w+u). Independent of the samplers it validates.

#include <array>
#include <cmath>
#include <vector>

namespace bhvtest {

class SpiderWalkOracle {
 public:
  SpiderWalkOracle(int axis0, double a, double t0, int m, int grid = 1200)
      : axis0_(axis0), grid_(grid) {
    double s = t0 / m;
    upper_ = a + 8.0 * std::sqrt(t0) + 0.5;
    h_ = upper_ / grid_;
    std::array<std::vector<double>, 3> rho;
    for (auto& r : rho) r.assign(grid_ + 1, 0.0);
    // First step analytically from the atom at (axis0, a).
    for (int axis = 0; axis < 3; ++axis) {
      for (int i = 0; i <= grid_; ++i) {
        double w = i * h_;
        rho[axis][i] = axis == axis0_ ? gauss(w - a, s)
                                      : 0.5 * gauss(w + a, s);
      }
    }
    std::vector<double> weights(grid_ + 1, h_);
    weights.front() = weights.back() = h_ / 2;  // trapezoid

    for (int step = 2; step <= m; ++step) {
      std::array<std::vector<double>, 3> next;
      for (auto& r : next) r.assign(grid_ + 1, 0.0);
      // Precompute the two convolution kernels on the lattice.
      // diff index |i-j| for g(w-u), sum index i+j for g(w+u).
      std::vector<double> gdiff(grid_ + 1), gsum(2 * grid_ + 1);
      for (int d = 0; d <= grid_; ++d) gdiff[d] = gauss(d * h_, s);
      for (int d = 0; d <= 2 * grid_; ++d) gsum[d] = gauss(d * h_, s);
      for (int axis = 0; axis < 3; ++axis) {
        for (int i = 0; i <= grid_; ++i) {
          double acc = 0.0;
          for (int j = 0; j <= grid_; ++j) {
            double wgt = weights[j];
            acc += gdiff[std::abs(i - j)] * rho[axis][j] * wgt;
            double cross = 0.5 * gsum[i + j] * wgt;
            acc += cross * (rho[(axis + 1) % 3][j] + rho[(axis + 2) % 3][j]);
          }
          next[axis][i] = acc;
        }
      }
      rho = std::move(next);
    }
    rho_ = std::move(rho);
  }

  double density(int axis, double b) const {
    if (b < 0.0 || b > upper_) return 0.0;
    double x = b / h_;
    int i = static_cast<int>(x);
    if (i >= grid_) return rho_[axis][grid_];
    double f = x - i;
    return (1 - f) * rho_[axis][i] + f * rho_[axis][i + 1];
  }

  double log_density(int axis, double b) const {
    return std::log(density(axis, b));
  }

  double total_mass() const {
    double mass = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      for (int i = 0; i <= grid_; ++i) {
        double w = (i == 0 || i == grid_) ? h_ / 2 : h_;
        mass += rho_[axis][i] * w;
      }
    }
    return mass;
  }

 private:
  static double gauss(double x, double var) {
    return std::exp(-x * x / (2 * var)) /
           std::sqrt(2 * 3.14159265358979323846 * var);
  }

  int axis0_;
  int grid_;
  double upper_;
  double h_;
  std::array<std::vector<double>, 3> rho_;
};

}  // namespace bhvtest
