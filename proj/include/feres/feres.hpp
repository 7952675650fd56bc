#ifndef FERES_FERES_HPP
#define FERES_FERES_HPP

#include "feres/angles.hpp"
#include "feres/circle_billiard.hpp"
#include "feres/errors.hpp"
#include "feres/feres_map.hpp"
#include "feres/measure_evolution.hpp"
#include "feres/pipeline_billiard.hpp"
#include "feres/random.hpp"
#include "feres/reachable_set.hpp"
#include "feres/statistics.hpp"

#endif  // FERES_FERES_HPP
