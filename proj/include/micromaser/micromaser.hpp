#pragma once

#include "micromaser/config.hpp"
#include "micromaser/dynamics.hpp"
#include "micromaser/errors.hpp"
#include "micromaser/experiments.hpp"
#include "micromaser/fock.hpp"
#include "micromaser/observables.hpp"
