#pragma once
// Everything: polynomial algebra through the study harness.

#include "hermite/polyalg.hpp"
#include "hermite/geometry.hpp"
#include "hermite/grid.hpp"
#include "hermite/operator.hpp"
#include "hermite/evolution.hpp"
#include "hermite/cbc.hpp"
#include "hermite/solutions.hpp"
#include "hermite/solver.hpp"
#include "hermite/harness.hpp"
