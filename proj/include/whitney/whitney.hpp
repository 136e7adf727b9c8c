// Everything at once: jets, Puiseux series, bundles and refinement,
// parametric elimination, Helly selection, patching, the section pipeline
// and the fixture format.
#ifndef WHITNEY_WHITNEY_HPP
#define WHITNEY_WHITNEY_HPP

#include "bundles.hpp"
#include "decay.hpp"
#include "elimination.hpp"
#include "expr.hpp"
#include "helly.hpp"
#include "io.hpp"
#include "jet.hpp"
#include "linalg.hpp"
#include "lp.hpp"
#include "multi_index.hpp"
#include "patching.hpp"
#include "pipeline.hpp"
#include "puiseux.hpp"
#include "sampling.hpp"
#include "scalar.hpp"
#include "taylor.hpp"

#endif
