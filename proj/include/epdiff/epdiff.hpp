#pragma once

#include "epdiff/bessel.hpp"
#include "epdiff/certifier.hpp"
#include "epdiff/grid.hpp"
#include "epdiff/hunter_saxton.hpp"
#include "epdiff/kernel.hpp"
#include "epdiff/liouville.hpp"
#include "epdiff/scenario.hpp"
#include "epdiff/solver.hpp"
#include "epdiff/stencil.hpp"
