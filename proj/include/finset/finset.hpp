#pragma once

#include "finset/bounds.hpp"
#include "finset/errors.hpp"
#include "finset/estimators.hpp"
#include "finset/experiment.hpp"
#include "finset/linalg.hpp"
#include "finset/lti.hpp"
#include "finset/matrix.hpp"
#include "finset/report_json.hpp"
#include "finset/rng.hpp"
