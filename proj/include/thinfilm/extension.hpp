#pragma once

#include "thinfilm/scaling.hpp"
#include "thinfilm/seminorm.hpp"

namespace thinfilm {

// Folds a height into (0, eps): reflect across x_d = 0, then repeat with
// period 2*eps.
double fold_height(double t, double eps);

// Even 2*eps-periodic extension of u in the vertical variable. Defined for
// every height; equals u on the film.
FieldFunction reflect_periodize(const FieldFunction& u, const ThinDomain& dom);

// L1 distance between the extended field and the horizontal limit over
// omega_inner x (0,1), midpoint quadrature with grid_n points per axis.
double reduction_distance(const FieldFunction& u_eps, const ThinDomain& dom,
                          const FieldFunction& u_limit, const Box& omega_inner, int grid_n);

// (1-s) * seminorm^2 of the extension over omega x (0,1) for each point of a
// path satisfying the thickness condition eps >= sqrt(1-s)/M. The returned
// sequence is inspected for boundedness.
std::vector<std::pair<double, double>> thick_film_sequence(const FieldFunction& u, const Box& omega,
                                                           const ParamPath& path, double M,
                                                           const SplitConfig& cfg,
                                                           std::uint64_t seed);

}  // namespace thinfilm
