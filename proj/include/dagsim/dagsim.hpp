#pragma once

#include "dagsim/config.hpp"
#include "dagsim/domain.hpp"
#include "dagsim/engine.hpp"
#include "dagsim/error.hpp"
#include "dagsim/gametheory.hpp"
#include "dagsim/harness.hpp"
#include "dagsim/ledger.hpp"
#include "dagsim/mempool.hpp"
#include "dagsim/network.hpp"
#include "dagsim/params.hpp"
#include "dagsim/random.hpp"
#include "dagsim/strategy.hpp"
