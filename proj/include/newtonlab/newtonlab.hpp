#pragma once

#include "newtonlab/analysis.hpp"
#include "newtonlab/directions.hpp"
#include "newtonlab/errors.hpp"
#include "newtonlab/linalg.hpp"
#include "newtonlab/oracle.hpp"
#include "newtonlab/problems.hpp"
#include "newtonlab/solvers.hpp"
#include "newtonlab/trace_io.hpp"
