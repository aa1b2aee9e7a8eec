#pragma once

#include "voltip/distance.hpp"
#include "voltip/grid.hpp"
#include "voltip/insertion.hpp"
#include "voltip/io.hpp"
#include "voltip/metal_artefact.hpp"
#include "voltip/morphology.hpp"
#include "voltip/phantoms.hpp"
#include "voltip/pso.hpp"
#include "voltip/radon.hpp"
#include "voltip/rotate.hpp"
#include "voltip/threat_isolation.hpp"
#include "voltip/void_determination.hpp"
