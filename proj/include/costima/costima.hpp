#pragma once

#include "costima/diffusion.hpp"
#include "costima/experiment.hpp"
#include "costima/graph.hpp"
#include "costima/io.hpp"
#include "costima/oracle.hpp"
#include "costima/reduction.hpp"
#include "costima/rng.hpp"
#include "costima/solvers.hpp"
