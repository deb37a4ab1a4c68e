// Static SVG line charts of a trajectory: V(t) against the decay envelope,
// the state norm, and the first control channel.

#pragma once

#include "finstab/integrator.hpp"

#include <optional>
#include <string>

namespace finstab {

struct PlotOptions {
    std::string title;
    std::optional<double> rate;  // envelope drawn when set
    double mu = 0.25;
};

std::string render_trajectory_svg(const Trajectory& traj, const PlotOptions& opts);

}  // namespace finstab
