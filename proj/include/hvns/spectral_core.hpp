#pragma once

// Periodic-box spectral calculus: grid, fields, transforms, operators, synthesis.

#include "hvns/errors.hpp"
#include "hvns/fourier_transform.hpp"
#include "hvns/spectral_field.hpp"
#include "hvns/spectral_grid.hpp"
#include "hvns/spectral_ops.hpp"
#include "hvns/synthesize.hpp"
