#pragma once

#include "letd/analysis.hpp"
#include "letd/geometry.hpp"
#include "letd/harness.hpp"
#include "letd/matfunc.hpp"
#include "letd/schwarz.hpp"
#include "letd/steppers.hpp"
