#pragma once

#include "nbstein/errors.hpp"
#include "nbstein/rng.hpp"
#include "nbstein/numerics.hpp"
#include "nbstein/distributions.hpp"
#include "nbstein/metrics.hpp"
#include "nbstein/monte_carlo.hpp"
#include "nbstein/stein.hpp"
#include "nbstein/ibd.hpp"
#include "nbstein/parasite.hpp"
#include "nbstein/grids.hpp"
#include "nbstein/report.hpp"
#include "nbstein/scenario_json.hpp"
