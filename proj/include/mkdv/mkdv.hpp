#pragma once

// Everything in one include.
#include "mkdv/coercivity.hpp"
#include "mkdv/error.hpp"
#include "mkdv/evolution.hpp"
#include "mkdv/functionals.hpp"
#include "mkdv/grid.hpp"
#include "mkdv/lyapunov.hpp"
#include "mkdv/modulation.hpp"
#include "mkdv/profiles.hpp"
