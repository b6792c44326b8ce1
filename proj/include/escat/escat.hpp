#pragma once

// Umbrella header for the escat library: deterministic simulator of a weakly
// driven two-level emitter in a 1D waveguide — steady state, two-time photon
// correlations behind an unbalanced (Franson-type) interferometer, CHSH
// correlations, scattering spectra, and the power-calibration / fitting layer.

#include "escat/bell.hpp"
#include "escat/calibration.hpp"
#include "escat/correlators.hpp"
#include "escat/field.hpp"
#include "escat/fitting.hpp"
#include "escat/franson.hpp"
#include "escat/io.hpp"
#include "escat/liouvillian.hpp"
#include "escat/parallel.hpp"
#include "escat/quadrature.hpp"
#include "escat/scattering.hpp"
#include "escat/spectrum.hpp"
#include "escat/types.hpp"
#include "escat/units.hpp"
#include "escat/version.hpp"
