#pragma once

#include "fsel/error.hpp"
#include "fsel/numcore.hpp"
#include "fsel/robustreg.hpp"
#include "fsel/fselect.hpp"
#include "fsel/lassopath.hpp"
#include "fsel/simlab.hpp"
#include "fsel/ivpipe.hpp"
#include "fsel/csv.hpp"
