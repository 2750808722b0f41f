#pragma once

#include <string>
#include <vector>

#include "thinfilm/sweep.hpp"

namespace thinfilm {

// Log-log plot of scaled energy versus eps with the predicted-limit line.
// Hand-emitted, fixed 640x480 viewport, no timestamps: byte-deterministic for
// identical records.
std::string render_sweep_svg(const std::vector<SweepRecord>& records, const std::string& title);

void write_sweep_svg(const std::vector<SweepRecord>& records, const std::string& title,
                     const std::string& path);

}  // namespace thinfilm
