#pragma once

#include "tentlab/error.hpp"
#include "tentlab/rng.hpp"
#include "tentlab/fft.hpp"
#include "tentlab/grid.hpp"
#include "tentlab/derivative.hpp"
#include "tentlab/polynomial.hpp"
#include "tentlab/inequalities.hpp"
#include "tentlab/coeffs.hpp"
#include "tentlab/operator.hpp"
#include "tentlab/semigroup.hpp"
#include "tentlab/krylov.hpp"
#include "tentlab/propagator.hpp"
#include "tentlab/functionals.hpp"
#include "tentlab/io.hpp"
#include "tentlab/version.hpp"
#include "tentlab/config.hpp"
#include "tentlab/experiments/registry.hpp"
