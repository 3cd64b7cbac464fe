#pragma once

#include "catdiff/analysis.hpp"
#include "catdiff/chain_io.hpp"
#include "catdiff/config.hpp"
#include "catdiff/dataset.hpp"
#include "catdiff/diagnostics.hpp"
#include "catdiff/errors.hpp"
#include "catdiff/gibbs.hpp"
#include "catdiff/model.hpp"
#include "catdiff/priors.hpp"
#include "catdiff/report.hpp"
#include "catdiff/rng.hpp"
#include "catdiff/simulate.hpp"
#include "catdiff/space.hpp"
