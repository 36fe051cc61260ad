#pragma once

#include "bootperc/binomial.hpp"
#include "bootperc/chain.hpp"
#include "bootperc/experiments.hpp"
#include "bootperc/graph.hpp"
#include "bootperc/model.hpp"
#include "bootperc/phase.hpp"
#include "bootperc/rng.hpp"
#include "bootperc/strategy.hpp"
