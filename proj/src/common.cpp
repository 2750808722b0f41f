#include "thinfilm/common.hpp"

#include <array>
#include <cstdio>

namespace thinfilm {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_dimension: return "InvalidDimension";
    case Errc::empty_box: return "EmptyBox";
    case Errc::nonpositive_thickness: return "NonpositiveThickness";
    case Errc::parse_error: return "ParseError";
    case Errc::unknown_variable: return "UnknownVariable";
    case Errc::invalid_s: return "InvalidS";
    case Errc::invalid_cutoff: return "InvalidCutoff";
    case Errc::degenerate_sampling: return "DegenerateSampling";
    case Errc::non_finite_sample: return "NonFiniteSample";
    case Errc::gradient_unavailable: return "GradientUnavailable";
    case Errc::not_horizontal: return "NotHorizontal";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::path_too_short: return "PathTooShort";
    case Errc::empty_interior: return "EmptyInterior";
    case Errc::outside_interior: return "OutsideInterior";
    case Errc::region_not_interior: return "RegionNotInterior";
    case Errc::invalid_sigma: return "InvalidSigma";
    case Errc::path_violates_thickness: return "PathViolatesThickness";
    case Errc::non_positive_values: return "NonPositiveValues";
    case Errc::too_few_points: return "TooFewPoints";
    case Errc::io_error: return "IoError";
    case Errc::schema_version_mismatch: return "SchemaVersionMismatch";
    case Errc::invalid_config: return "InvalidConfig";
  }
  return "Error";
}

Box Box::make(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size() || lo.empty())
    throw Error(Errc::empty_box, "box extents must be nonempty and of equal length");
  if (lo.size() > std::size_t(kMaxDim))
    throw Error(Errc::invalid_dimension, "dimension exceeds supported maximum");
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (!(lo[a] < hi[a])) throw Error(Errc::empty_box, "box has empty extent on axis " + std::to_string(a));
  return Box{std::move(lo), std::move(hi)};
}

std::string format_double(double v) {
  std::array<char, 40> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string join_doubles(std::span<const double> v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(sep);
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace thinfilm
