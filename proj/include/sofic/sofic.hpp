#pragma once

// Umbrella header. json.hpp is not included: it needs nlohmann/json.

#include "sofic/approximation.hpp"
#include "sofic/element.hpp"
#include "sofic/errors.hpp"
#include "sofic/extension.hpp"
#include "sofic/folner.hpp"
#include "sofic/group.hpp"
#include "sofic/group_spec.hpp"
#include "sofic/hyperlinear.hpp"
#include "sofic/metric.hpp"
#include "sofic/permutation.hpp"
#include "sofic/rational.hpp"
#include "sofic/wreath.hpp"
#include "sofic/wreath_approx.hpp"
