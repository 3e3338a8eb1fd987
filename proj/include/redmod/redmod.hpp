#pragma once

// Umbrella header: the whole library in one include.

#include "redmod/errors.hpp"
#include "redmod/multiindex.hpp"
#include "redmod/indet.hpp"
#include "redmod/poly.hpp"
#include "redmod/expr.hpp"
#include "redmod/context.hpp"
#include "redmod/parser.hpp"
#include "redmod/jet.hpp"
#include "redmod/vfmod.hpp"
#include "redmod/manifold.hpp"
#include "redmod/reduction.hpp"
#include "redmod/evolution.hpp"
#include "redmod/classify2.hpp"
