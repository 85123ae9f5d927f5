#pragma once

// Prescribed contact-angle data phi on the boundary and its summary statistics.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "lmcf/grid.hpp"

namespace lmcf {

enum class PhiKind { constant, fourier, table };

/// phi(s) = value                                     (constant)
///        = a0 + sum_k cos_k cos(k s) + sin_k sin(k s) (fourier, k = 1, 2, ...)
///        = table[j] at s_j                            (table, length n_angular)
struct PhiSpec {
  PhiKind kind = PhiKind::constant;
  double value = 0.0;
  std::vector<double> cos_coefs;
  std::vector<double> sin_coefs;
  std::vector<double> table;
};

class ContactAngle {
public:
  ContactAngle(const PhiSpec& spec, const CurvilinearGrid& grid) : spec_(spec) {
    const int n = grid.n_angular();
    phi_.resize(n);
    dphi_ds_.resize(n);
    if (spec.kind == PhiKind::table) {
      if (static_cast<int>(spec.table.size()) != n) {
        throw ScenarioError("phi table has " + std::to_string(spec.table.size()) +
                            " entries, grid has n_angular = " + std::to_string(n));
      }
      for (int j = 0; j < n; ++j) phi_[j] = spec.table[j];
      // fourth-order periodic central difference
      for (int j = 0; j < n; ++j) {
        auto at = [&](int o) { return phi_[grid.wrap(j + o)]; };
        dphi_ds_[j] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * grid.ds());
      }
    } else {
      for (int j = 0; j < n; ++j) {
        phi_[j] = value(grid.s(j));
        dphi_ds_[j] = derivative(grid.s(j));
      }
    }
    if (!phi_.allFinite()) throw ScenarioError("phi is not finite");

    phi0_ = phi_.minCoeff();
    phi1_ = phi_.maxCoeff();
    phi2_ = 0.0;
    for (int j = 0; j < n; ++j) phi2_ = std::max(phi2_, std::abs(dphi_ds_[j]) / grid.boundary_speed(j));
    integral_ = boundary_integral(grid, phi_);
  }

  const PhiSpec& spec() const { return spec_; }

  /// phi at boundary node j.
  double operator[](int j) const { return phi_[j]; }
  const Eigen::VectorXd& samples() const { return phi_; }
  /// d phi / ds at boundary node j; D_T phi = this / boundary_speed(j).
  double dphi_ds(int j) const { return dphi_ds_[j]; }

  double phi0() const { return phi0_; }
  double phi1() const { return phi1_; }
  double phi2() const { return phi2_; }
  /// Integral of phi over the boundary with respect to sigma-arclength.
  double boundary_integral_value() const { return integral_; }

private:
  double value(double s) const {
    if (spec_.kind == PhiKind::constant) return spec_.value;
    double v = spec_.value;
    for (std::size_t k = 0; k < spec_.cos_coefs.size(); ++k) v += spec_.cos_coefs[k] * std::cos((k + 1) * s);
    for (std::size_t k = 0; k < spec_.sin_coefs.size(); ++k) v += spec_.sin_coefs[k] * std::sin((k + 1) * s);
    return v;
  }

  double derivative(double s) const {
    if (spec_.kind == PhiKind::constant) return 0.0;
    double d = 0.0;
    for (std::size_t k = 0; k < spec_.cos_coefs.size(); ++k)
      d -= (k + 1) * spec_.cos_coefs[k] * std::sin((k + 1) * s);
    for (std::size_t k = 0; k < spec_.sin_coefs.size(); ++k)
      d += (k + 1) * spec_.sin_coefs[k] * std::cos((k + 1) * s);
    return d;
  }

  PhiSpec spec_;
  Eigen::VectorXd phi_;
  Eigen::VectorXd dphi_ds_;
  double phi0_ = 0, phi1_ = 0, phi2_ = 0, integral_ = 0;
};

}  // namespace lmcf
