#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "lmcf/flow.hpp"
#include "lmcf/translator.hpp"

namespace lmcf::test {

inline GridPtr disk_grid(int n, Metric metric = {}, double radius = 1.0) {
  DomainSpec d;
  d.radius = radius;
  return build_grid(build_domain(d, metric), n, 2 * n);
}

inline GridPtr ellipse_grid(int n, double a, double b, Metric metric = {}) {
  DomainSpec d;
  d.kind = DomainKind::ellipse;
  d.a = a;
  d.b = b;
  return build_grid(build_domain(d, metric), n, 2 * n);
}

inline PhiSpec constant_phi(double value) {
  PhiSpec p;
  p.value = value;
  return p;
}

inline PhiSpec fourier_phi(double a0, std::vector<double> cos_coefs, std::vector<double> sin_coefs = {}) {
  PhiSpec p;
  p.kind = PhiKind::fourier;
  p.value = a0;
  p.cos_coefs = std::move(cos_coefs);
  p.sin_coefs = std::move(sin_coefs);
  return p;
}

/// Radial quadratic -alpha |x|^2 satisfying the contact condition for constant phi on the
/// flat unit disk.
inline GridFunction compatible_disk_data(const GridPtr& g, double phi) {
  const double alpha = 0.5 * phi / std::sqrt(1.0 + phi * phi);
  return GridFunction::sample(g, [alpha](const Vec2& x) { return -alpha * x.squaredNorm(); });
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("lmcf_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace lmcf::test
