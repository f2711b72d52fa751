#ifndef QLEAD_QLEAD_HPP
#define QLEAD_QLEAD_HPP

// Umbrella header for the queueing lead-time pricing toolkit.

#include "qlead/equilibrium.hpp"
#include "qlead/extvalue.hpp"
#include "qlead/interval.hpp"
#include "qlead/loadcontrol.hpp"
#include "qlead/market.hpp"
#include "qlead/model.hpp"
#include "qlead/roots.hpp"
#include "qlead/sim.hpp"
#include "qlead/utility.hpp"

#endif
