#pragma once

#include "pcmsel/distribution.hpp"
#include "pcmsel/error.hpp"
#include "pcmsel/metrics.hpp"
#include "pcmsel/proxy.hpp"
#include "pcmsel/selection.hpp"
#include "pcmsel/stats.hpp"
#include "pcmsel/synthetic.hpp"
#include "pcmsel/zoo_data.hpp"
