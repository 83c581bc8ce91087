#pragma once

// Umbrella header.

#include "alcurate/calibration.hpp"
#include "alcurate/classifier.hpp"
#include "alcurate/config_file.hpp"
#include "alcurate/csv_io.hpp"
#include "alcurate/datagen.hpp"
#include "alcurate/dataset.hpp"
#include "alcurate/errors.hpp"
#include "alcurate/experiment.hpp"
#include "alcurate/metrics.hpp"
#include "alcurate/partition.hpp"
#include "alcurate/probability.hpp"
#include "alcurate/report.hpp"
#include "alcurate/rng.hpp"
#include "alcurate/sampling.hpp"
#include "alcurate/uncertainty.hpp"
#include "alcurate/version.hpp"
