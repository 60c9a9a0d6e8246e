#pragma once

#include "dcsc/hungarian.hpp"
#include "dcsc/kmeans.hpp"
#include "dcsc/prototypes.hpp"
#include "dcsc/sinkhorn.hpp"
