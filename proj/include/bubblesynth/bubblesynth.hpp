#pragma once

#include "bubblesynth/audio_io.hpp"
#include "bubblesynth/bubble_solver.hpp"
#include "bubblesynth/config.hpp"
#include "bubblesynth/errors.hpp"
#include "bubblesynth/physics_params.hpp"
#include "bubblesynth/pipelines.hpp"
#include "bubblesynth/reservoir.hpp"
#include "bubblesynth/rk4.hpp"
#include "bubblesynth/score_codec.hpp"
#include "bubblesynth/signal_analysis.hpp"
