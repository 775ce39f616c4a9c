#pragma once

#include "bitrade/core.hpp"
#include "bitrade/environment.hpp"
#include "bitrade/estimators.hpp"
#include "bitrade/grid.hpp"
#include "bitrade/hard_instance.hpp"
#include "bitrade/harness.hpp"
#include "bitrade/learners.hpp"
#include "bitrade/market.hpp"
#include "bitrade/random.hpp"
#include "bitrade/sleeping_expert.hpp"
