#pragma once

#include "errors.hpp"
#include "interval.hpp"
#include "geometry.hpp"
#include "mesh.hpp"
#include "fem.hpp"
#include "eigensolve.hpp"
#include "verified_bounds.hpp"
#include "subspace_error.hpp"
#include "shape_derivative.hpp"
#include "report.hpp"
