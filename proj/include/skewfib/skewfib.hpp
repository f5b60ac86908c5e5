#pragma once

#include "skewfib/error.hpp"
#include "skewfib/numeric.hpp"
#include "skewfib/sampling.hpp"
#include "skewfib/dims.hpp"
#include "skewfib/grassmann.hpp"
#include "skewfib/report.hpp"
#include "skewfib/bilinear.hpp"
#include "skewfib/chart.hpp"
#include "skewfib/fibration.hpp"
#include "skewfib/sphere.hpp"
#include "skewfib/contact.hpp"
#include "skewfib/io.hpp"
