#pragma once

#include "dzip/backtest.hpp"
#include "dzip/calendar.hpp"
#include "dzip/config.hpp"
#include "dzip/count_model.hpp"
#include "dzip/diagnostics.hpp"
#include "dzip/engine.hpp"
#include "dzip/error.hpp"
#include "dzip/forecast.hpp"
#include "dzip/innovations.hpp"
#include "dzip/io.hpp"
#include "dzip/latent_sampler.hpp"
#include "dzip/math.hpp"
#include "dzip/priors.hpp"
#include "dzip/random.hpp"
#include "dzip/report.hpp"
#include "dzip/simulate.hpp"
#include "dzip/tridiagonal.hpp"
