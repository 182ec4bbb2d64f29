#pragma once

#include "celm/arousal.hpp"
#include "celm/curiosity.hpp"
#include "celm/data.hpp"
#include "celm/error.hpp"
#include "celm/harness.hpp"
#include "celm/metrics.hpp"
#include "celm/network.hpp"
#include "celm/solver.hpp"
#include "celm/trainer.hpp"
