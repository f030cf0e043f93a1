#pragma once

#include "espc/error.hpp"
#include "espc/key_array.hpp"
#include "espc/search.hpp"
#include "espc/espc_index.hpp"
#include "espc/hier_index.hpp"
#include "espc/sizing.hpp"
#include "espc/stats.hpp"
#include "espc/density.hpp"
#include "espc/data.hpp"
#include "espc/bench.hpp"
