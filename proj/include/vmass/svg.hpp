#pragma once

#include <string>

#include "vmass/laminate.hpp"
#include "vmass/michell.hpp"

namespace vmass {

// Truss layout: bar stroke width proportional to the mass weight, tension
// red, compression blue; zero-weight bars drawn as hairlines.
std::string truss_svg(const GroundStructure& gs, const LimitShape& shape);

// Cross-section of the 2D slab union on the unit square.
std::string laminate_svg(const LaminateConstruction& c);

}  // namespace vmass
