#pragma once

#include "bosestats/condensate.hpp"
#include "bosestats/constants.hpp"
#include "bosestats/csv.hpp"
#include "bosestats/cubature.hpp"
#include "bosestats/detector.hpp"
#include "bosestats/errors.hpp"
#include "bosestats/experiment.hpp"
#include "bosestats/figures.hpp"
#include "bosestats/json_io.hpp"
#include "bosestats/neldermead.hpp"
#include "bosestats/noise.hpp"
#include "bosestats/rng.hpp"
#include "bosestats/special.hpp"
#include "bosestats/stats.hpp"
#include "bosestats/svg.hpp"
#include "bosestats/symeig3.hpp"
#include "bosestats/trap.hpp"
#include "bosestats/vec3.hpp"
