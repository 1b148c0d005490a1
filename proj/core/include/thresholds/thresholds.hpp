#pragma once

#include "thresholds/curves.hpp"
#include "thresholds/dataset.hpp"
#include "thresholds/difficulty.hpp"
#include "thresholds/error.hpp"
#include "thresholds/estimation.hpp"
#include "thresholds/likelihood.hpp"
#include "thresholds/model.hpp"
#include "thresholds/optimizer.hpp"
#include "thresholds/parallel.hpp"
#include "thresholds/quadrature.hpp"
#include "thresholds/report.hpp"
#include "thresholds/response_function.hpp"
#include "thresholds/rng.hpp"
#include "thresholds/scoring.hpp"
#include "thresholds/simulation.hpp"
#include "thresholds/types.hpp"
