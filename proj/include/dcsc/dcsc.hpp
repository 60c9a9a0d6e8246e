#pragma once

#include "dcsc/assignment.hpp"
#include "dcsc/checkpoint.hpp"
#include "dcsc/data.hpp"
#include "dcsc/encoder.hpp"
#include "dcsc/error.hpp"
#include "dcsc/io.hpp"
#include "dcsc/losses.hpp"
#include "dcsc/metrics.hpp"
#include "dcsc/pipeline.hpp"
#include "dcsc/synth.hpp"
#include "dcsc/trainer.hpp"
