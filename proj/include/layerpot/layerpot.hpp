#pragma once

#include "layerpot/common.hpp"
#include "layerpot/corrections.hpp"
#include "layerpot/density_fit.hpp"
#include "layerpot/grid_embedding.hpp"
#include "layerpot/harness.hpp"
#include "layerpot/layer_potentials.hpp"
#include "layerpot/level_surface.hpp"
#include "layerpot/regularized_kernels.hpp"
#include "layerpot/special_functions.hpp"
#include "layerpot/sphere_pou.hpp"
#include "layerpot/summation.hpp"
#include "layerpot/surface_quadrature.hpp"
#include "layerpot/surfaces.hpp"
