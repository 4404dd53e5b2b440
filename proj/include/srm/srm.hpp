#pragma once

#include "srm/analysis.hpp"
#include "srm/experiments.hpp"
#include "srm/harness.hpp"
#include "srm/io.hpp"
#include "srm/linear_map.hpp"
#include "srm/operator.hpp"
#include "srm/randomize.hpp"
#include "srm/recovery.hpp"
#include "srm/rng.hpp"
#include "srm/transforms.hpp"
