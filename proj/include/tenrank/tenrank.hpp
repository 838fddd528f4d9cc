#pragma once

#include "tenrank/errors.hpp"
#include "tenrank/gf.hpp"
#include "tenrank/linalg.hpp"
#include "tenrank/tensor.hpp"
#include "tenrank/parallel.hpp"
#include "tenrank/subspace.hpp"
#include "tenrank/analytic.hpp"
#include "tenrank/search.hpp"
#include "tenrank/constructions.hpp"
#include "tenrank/io.hpp"
