#pragma once

// Umbrella header for the library modules. The CLI layer lives in winr/cli.hpp.

#include "winr/numerics.hpp"
#include "winr/rng.hpp"
#include "winr/io.hpp"
#include "winr/templates.hpp"
#include "winr/spectrum.hpp"
#include "winr/model.hpp"
#include "winr/model_io.hpp"
#include "winr/expansion.hpp"
#include "winr/training.hpp"
#include "winr/signals.hpp"
#include "winr/init.hpp"
#include "winr/spectral.hpp"
#include "winr/experiments.hpp"
