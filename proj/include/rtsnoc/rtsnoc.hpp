#pragma once

#include "rtsnoc/error.hpp"
#include "rtsnoc/core_model.hpp"
#include "rtsnoc/routing_arbitration.hpp"
#include "rtsnoc/router.hpp"
#include "rtsnoc/network.hpp"
#include "rtsnoc/sim_engine.hpp"
#include "rtsnoc/analytics.hpp"
#include "rtsnoc/config.hpp"
#include "rtsnoc/scenario.hpp"
