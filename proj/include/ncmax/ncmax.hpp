#pragma once

#include "ncmax/errors.hpp"
#include "ncmax/harness.hpp"
#include "ncmax/json_io.hpp"
#include "ncmax/majorant.hpp"
#include "ncmax/nets.hpp"
#include "ncmax/random.hpp"
#include "ncmax/spaces.hpp"
#include "ncmax/step_function.hpp"
#include "ncmax/tolerance.hpp"
#include "ncmax/tracial.hpp"
