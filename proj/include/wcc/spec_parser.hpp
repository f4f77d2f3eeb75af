#pragma once

#include <string_view>

#include "wcc/maps.hpp"

namespace wcc {

// Map specification mini-language:
//   mp:z=3,r=1            pl:geom,a=2        pl:pow,alpha=0.5
//   pl:log                pl:file,path=eps.txt
// Optional trailing keys for every map: precision=plain|extended|ode-approx,
// threshold=<real>, cap=<integer>. Errors are ParseError with a 1-based column.
MapSpec parse_map_spec(std::string_view text);

}  // namespace wcc
