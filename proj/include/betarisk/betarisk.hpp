#pragma once

#include "betarisk/beta_fusion.hpp"
#include "betarisk/netsim.hpp"
#include "betarisk/network_io.hpp"
#include "betarisk/trust_table.hpp"
