#ifndef RFFQRNG_RFFQRNG_HPP
#define RFFQRNG_RFFQRNG_HPP

#include "rffqrng/analytic_model.hpp"
#include "rffqrng/bitstream.hpp"
#include "rffqrng/error.hpp"
#include "rffqrng/event_source.hpp"
#include "rffqrng/io.hpp"
#include "rffqrng/parallel.hpp"
#include "rffqrng/rff_core.hpp"
#include "rffqrng/rng.hpp"
#include "rffqrng/stats.hpp"
#include "rffqrng/sts/battery.hpp"
#include "rffqrng/sts/constants.hpp"
#include "rffqrng/sts/special_functions.hpp"
#include "rffqrng/sts/tests.hpp"

#endif  // RFFQRNG_RFFQRNG_HPP
