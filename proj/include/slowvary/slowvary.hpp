#pragma once

#include "slowvary/error.hpp"
#include "slowvary/io.hpp"
#include "slowvary/linalg.hpp"
#include "slowvary/models.hpp"
#include "slowvary/multiindex.hpp"
#include "slowvary/operator_family.hpp"
#include "slowvary/parallel.hpp"
#include "slowvary/rational.hpp"
#include "slowvary/reduction.hpp"
#include "slowvary/simulate.hpp"
#include "slowvary/spectral_split.hpp"
#include "slowvary/sylvester.hpp"
#include "slowvary/taylor_system.hpp"
