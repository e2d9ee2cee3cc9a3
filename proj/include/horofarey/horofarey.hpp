#pragma once

#include "horofarey/errors.hpp"
#include "horofarey/matrix.hpp"
#include "horofarey/group.hpp"
#include "horofarey/farey.hpp"
#include "horofarey/random.hpp"
#include "horofarey/parallel.hpp"
#include "horofarey/lattice.hpp"
#include "horofarey/stats.hpp"
#include "horofarey/limit_laws.hpp"
#include "horofarey/proof_geometry.hpp"
#include "horofarey/io.hpp"
#include "horofarey/experiments.hpp"
