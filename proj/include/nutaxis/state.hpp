#pragma once

// Simulation state: both unknowns sampled at cell centers at one time.
// Invariants maintained by the solver: u >= 0 componentwise, v > 0
// componentwise, sizes match the grid.

#include "nutaxis/grid.hpp"

namespace nutaxis {

struct State {
    double t = 0.0;
    Field u;
    Field v;
};

} // namespace nutaxis
