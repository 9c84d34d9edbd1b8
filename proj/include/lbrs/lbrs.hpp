#pragma once

#include "lbrs/core.hpp"
#include "lbrs/environment.hpp"
#include "lbrs/agents.hpp"
#include "lbrs/metrics.hpp"
#include "lbrs/harness.hpp"
