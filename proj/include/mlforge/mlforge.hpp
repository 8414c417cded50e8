#pragma once

// Umbrella header.

#include "arff.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "data.hpp"
#include "error.hpp"
#include "folds.hpp"
#include "learners.hpp"
#include "matrix.hpp"
#include "metrics.hpp"
#include "model_io.hpp"
#include "parallel.hpp"
#include "prediction.hpp"
#include "predictions_io.hpp"
#include "random.hpp"
#include "report.hpp"
#include "resample.hpp"
#include "synthetic.hpp"
#include "text.hpp"
#include "transform.hpp"
