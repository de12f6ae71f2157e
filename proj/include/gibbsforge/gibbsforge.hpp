#pragma once

#include "gibbsforge/circle.hpp"
#include "gibbsforge/dynamics.hpp"
#include "gibbsforge/equilibrium.hpp"
#include "gibbsforge/errors.hpp"
#include "gibbsforge/experiment.hpp"
#include "gibbsforge/gibbs.hpp"
#include "gibbsforge/grid.hpp"
#include "gibbsforge/hypotheses.hpp"
#include "gibbsforge/hyptimes.hpp"
#include "gibbsforge/io.hpp"
#include "gibbsforge/potentials.hpp"
#include "gibbsforge/sparse.hpp"
#include "gibbsforge/stability.hpp"
#include "gibbsforge/transfer.hpp"
