#pragma once

#include "error.hpp"
#include "format.hpp"
#include "distributions.hpp"
#include "model_spec.hpp"
#include "data_model.hpp"
#include "ols.hpp"
#include "ordered_probit.hpp"
#include "diagnostics.hpp"
#include "pipeline.hpp"
#include "synth.hpp"
#include "report.hpp"
#include "analysis.hpp"
