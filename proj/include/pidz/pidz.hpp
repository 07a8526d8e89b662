#pragma once

#include "pidz/actuator.hpp"
#include "pidz/analysis.hpp"
#include "pidz/control.hpp"
#include "pidz/output.hpp"
#include "pidz/plant.hpp"
#include "pidz/scenario_io.hpp"
#include "pidz/scenarios.hpp"
#include "pidz/sim.hpp"
#include "pidz/trajectory.hpp"
