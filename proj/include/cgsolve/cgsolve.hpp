#pragma once

#include "cgsolve/error.hpp"
#include "cgsolve/linalg.hpp"
#include "cgsolve/generators.hpp"
#include "cgsolve/direct_solve.hpp"
#include "cgsolve/solver.hpp"
#include "cgsolve/diagnostics.hpp"
#include "cgsolve/mmio.hpp"
