#pragma once

#include "igh/core.hpp"
#include "igh/dataio.hpp"
#include "igh/datagen.hpp"
#include "igh/dataset.hpp"
#include "igh/error.hpp"
#include "igh/experiment.hpp"
#include "igh/kernel.hpp"
#include "igh/metrics.hpp"
#include "igh/random.hpp"
#include "igh/svg_plot.hpp"
