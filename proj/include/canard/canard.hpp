#pragma once

#include "error.hpp"
#include "signed_power.hpp"
#include "roots.hpp"
#include "system.hpp"
#include "models.hpp"
#include "integrator.hpp"
#include "periodic.hpp"
#include "microscope.hpp"
#include "pinch.hpp"
#include "canard_analysis.hpp"
#include "io.hpp"
#include "scenario.hpp"
