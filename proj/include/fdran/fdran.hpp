/**
 * \file fdran/fdran.hpp
 *
 * \brief Umbrella header.
 */
#pragma once

#include "fdran/common.hpp"
#include "fdran/netmodel.hpp"
#include "fdran/powermodel.hpp"
#include "fdran/barrier.hpp"
#include "fdran/powerctl.hpp"
#include "fdran/matching.hpp"
#include "fdran/config.hpp"
#include "fdran/harness.hpp"
