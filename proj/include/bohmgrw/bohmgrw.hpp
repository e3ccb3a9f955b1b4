#pragma once

// Everything except the command-line harness.

#include "bohmgrw/csv.hpp"
#include "bohmgrw/error.hpp"
#include "bohmgrw/fft.hpp"
#include "bohmgrw/field.hpp"
#include "bohmgrw/grid.hpp"
#include "bohmgrw/interp.hpp"
#include "bohmgrw/parallel.hpp"
#include "bohmgrw/propagate.hpp"
#include "bohmgrw/rng.hpp"
#include "bohmgrw/sampling.hpp"

#include "bohmgrw/bohm/conditional.hpp"
#include "bohmgrw/bohm/density_matrix.hpp"
#include "bohmgrw/bohm/equivariance.hpp"
#include "bohmgrw/bohm/trajectories.hpp"
#include "bohmgrw/bohm/velocity.hpp"

#include "bohmgrw/grw/collapse.hpp"
#include "bohmgrw/grw/guided.hpp"
#include "bohmgrw/grw/master_equation.hpp"

#include "bohmgrw/bath/collision.hpp"
#include "bohmgrw/bath/estimates.hpp"
#include "bohmgrw/bath/multi_collision.hpp"

#include "bohmgrw/com/amplification.hpp"
#include "bohmgrw/com/collision.hpp"
#include "bohmgrw/com/many_body.hpp"

#include "bohmgrw/classical/qmupl.hpp"
#include "bohmgrw/classical/sde.hpp"
