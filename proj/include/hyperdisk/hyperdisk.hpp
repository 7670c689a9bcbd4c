#pragma once

#include "hyperdisk/embedding.hpp"
#include "hyperdisk/error.hpp"
#include "hyperdisk/geometry.hpp"
#include "hyperdisk/graph.hpp"
#include "hyperdisk/infotheory.hpp"
#include "hyperdisk/io.hpp"
#include "hyperdisk/metrics.hpp"
#include "hyperdisk/networks.hpp"
#include "hyperdisk/random.hpp"
#include "hyperdisk/stats.hpp"
