#pragma once

#include "wrrnoc/errors.hpp"
#include "wrrnoc/traffic.hpp"
#include "wrrnoc/arbiter_analysis.hpp"
#include "wrrnoc/topology.hpp"
#include "wrrnoc/network.hpp"
#include "wrrnoc/network_analysis.hpp"
#include "wrrnoc/wrr_arbiter.hpp"
#include "wrrnoc/simulator.hpp"
#include "wrrnoc/scenario.hpp"
#include "wrrnoc/report.hpp"
#include "wrrnoc/harness.hpp"
