#pragma once

#include "pbec/units.hpp"
#include "pbec/model.hpp"
#include "pbec/config_io.hpp"
#include "pbec/spectral_rates.hpp"
#include "pbec/kinetics.hpp"
#include "pbec/thresholds.hpp"
#include "pbec/thermo.hpp"
#include "pbec/experiments.hpp"
