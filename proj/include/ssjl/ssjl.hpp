#pragma once

#include "ssjl/bounds.hpp"
#include "ssjl/error.hpp"
#include "ssjl/experiments.hpp"
#include "ssjl/montecarlo.hpp"
#include "ssjl/params.hpp"
#include "ssjl/report.hpp"
#include "ssjl/rng.hpp"
#include "ssjl/sampler.hpp"
#include "ssjl/stats.hpp"
#include "ssjl/transform.hpp"
