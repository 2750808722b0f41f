#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace thinfilm {

// Hard cap on the spatial dimension; lets hot paths use fixed-size buffers.
inline constexpr int kMaxDim = 8;

enum class Errc {
  invalid_dimension,
  empty_box,
  nonpositive_thickness,
  parse_error,
  unknown_variable,
  invalid_s,
  invalid_cutoff,
  degenerate_sampling,
  non_finite_sample,
  gradient_unavailable,
  not_horizontal,
  budget_exceeded,
  path_too_short,
  empty_interior,
  outside_interior,
  region_not_interior,
  invalid_sigma,
  path_violates_thickness,
  non_positive_values,
  too_few_points,
  io_error,
  schema_version_mismatch,
  invalid_config,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::size_t position = std::string::npos)
      : std::runtime_error(std::move(message)), code_(code), position_(position) {}

  Errc code() const { return code_; }
  // Byte offset for parse errors; npos otherwise.
  std::size_t position() const { return position_; }

 private:
  Errc code_;
  std::size_t position_;
};

const char* errc_name(Errc code);

// Axis-aligned box, the only region type used anywhere in the project.
struct Box {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }

  double extent(int axis) const { return hi[axis] - lo[axis]; }

  double volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= extent(a);
    return v;
  }

  bool contains_open(std::span<const double> x) const {
    for (int a = 0; a < dim(); ++a)
      if (!(x[a] > lo[a] && x[a] < hi[a])) return false;
    return true;
  }

  bool contains_closed(std::span<const double> x) const {
    for (int a = 0; a < dim(); ++a)
      if (x[a] < lo[a] || x[a] > hi[a]) return false;
    return true;
  }

  static Box make(std::vector<double> lo, std::vector<double> hi);
};

// Shortest round-trip decimal formatting (locale independent).
std::string format_double(double v);

std::string join_doubles(std::span<const double> v, char sep = ',');

}  // namespace thinfilm
