#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace kpplab {

/// Solution samples on a window of the global lattice x_i = i * dx.
struct Field {
  double t = 0.0;
  double dx = 0.05;
  /// Global lattice index of values.front().
  std::int64_t first_index = 0;
  std::vector<double> u;
  /// Number of time steps taken since initialisation.
  std::int64_t steps = 0;

  /// Optional log-tail segment: for global indices >= log_first_index the solver
  /// evolves log u; `u` still holds exp(log_u) (possibly underflowed to 0).
  std::int64_t log_first_index = -1;
  std::vector<double> log_u;

  std::size_t size() const noexcept { return u.size(); }
  double x(std::size_t i) const noexcept {
    return static_cast<double>(first_index + static_cast<std::int64_t>(i)) * dx;
  }
  double x_lo() const noexcept { return x(0); }
  double x_hi() const noexcept { return u.empty() ? x_lo() : x(u.size() - 1); }
  bool has_log_tail() const noexcept { return log_first_index >= 0; }
  std::span<const double> values() const noexcept { return u; }
};

}  // namespace kpplab
