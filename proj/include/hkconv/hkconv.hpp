#pragma once

// Umbrella header for the whole library.

#include "hkconv/metric_space.hpp"
#include "hkconv/cone_geometry.hpp"
#include "hkconv/measure.hpp"
#include "hkconv/classical_distances.hpp"
#include "hkconv/uot_solver.hpp"
#include "hkconv/minplus.hpp"
#include "hkconv/infconv.hpp"
#include "hkconv/hilbertian.hpp"
#include "hkconv/io.hpp"
#include "hkconv/harness.hpp"
