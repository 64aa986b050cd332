#pragma once

#include "devrate/catalog.hpp"
#include "devrate/decompose.hpp"
#include "devrate/error.hpp"
#include "devrate/expr.hpp"
#include "devrate/field.hpp"
#include "devrate/grid.hpp"
#include "devrate/lyapunov.hpp"
#include "devrate/model.hpp"
#include "devrate/ratefn.hpp"
#include "devrate/rng.hpp"
#include "devrate/scgf.hpp"
#include "devrate/simulate.hpp"
#include "devrate/spectral.hpp"
#include "devrate/types.hpp"
