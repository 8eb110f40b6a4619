// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fwmiq/active_set.hpp"
#include "fwmiq/bnb.hpp"
#include "fwmiq/eigen.hpp"
#include "fwmiq/fw.hpp"
#include "fwmiq/ingest.hpp"
#include "fwmiq/lmo.hpp"
#include "fwmiq/lns.hpp"
#include "fwmiq/lp.hpp"
#include "fwmiq/metrics.hpp"
#include "fwmiq/model.hpp"
#include "fwmiq/oracle.hpp"
#include "fwmiq/penalty.hpp"
#include "fwmiq/pool.hpp"
#include "fwmiq/portfolio.hpp"
#include "fwmiq/presolve.hpp"
#include "fwmiq/report.hpp"
#include "fwmiq/util.hpp"
