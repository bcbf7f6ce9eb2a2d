#pragma once

// Umbrella header.
#include "dpcg/error.hpp"
#include "dpcg/expression.hpp"
#include "dpcg/fe_space.hpp"
#include "dpcg/galerkin.hpp"
#include "dpcg/mesh.hpp"
#include "dpcg/modular.hpp"
#include "dpcg/multifunction.hpp"
#include "dpcg/operators.hpp"
#include "dpcg/problem.hpp"
#include "dpcg/quadrature.hpp"
