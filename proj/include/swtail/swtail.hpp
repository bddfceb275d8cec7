#pragma once

#include "swtail/check.hpp"
#include "swtail/check_types.hpp"
#include "swtail/cli.hpp"
#include "swtail/errors.hpp"
#include "swtail/io.hpp"
#include "swtail/jump_process.hpp"
#include "swtail/linalg.hpp"
#include "swtail/model.hpp"
#include "swtail/montecarlo.hpp"
#include "swtail/parallel.hpp"
#include "swtail/path_functionals.hpp"
#include "swtail/rng.hpp"
#include "swtail/spectral.hpp"
