#pragma once

#include "slerho/errors.hpp"
#include "slerho/cft.hpp"
#include "slerho/rng.hpp"
#include "slerho/parallel.hpp"
#include "slerho/chordal.hpp"
#include "slerho/strip.hpp"
#include "slerho/quadrature.hpp"
#include "slerho/observables.hpp"
#include "slerho/consistency.hpp"
#include "slerho/virasoro.hpp"
#include "slerho/io.hpp"
#include "slerho/config.hpp"
#include "slerho/cli.hpp"
