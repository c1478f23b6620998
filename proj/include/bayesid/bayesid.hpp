#pragma once

#include "bayesid/baselines.hpp"
#include "bayesid/config.hpp"
#include "bayesid/errors.hpp"
#include "bayesid/features.hpp"
#include "bayesid/gauss_bayes.hpp"
#include "bayesid/hyper_est.hpp"
#include "bayesid/integrator.hpp"
#include "bayesid/metrics.hpp"
#include "bayesid/pipeline.hpp"
#include "bayesid/report.hpp"
#include "bayesid/rng.hpp"
#include "bayesid/systems.hpp"
#include "bayesid/types.hpp"
