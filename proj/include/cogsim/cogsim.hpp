#pragma once

#include "cogsim/analytic.hpp"
#include "cogsim/channel.hpp"
#include "cogsim/dominance.hpp"
#include "cogsim/engine.hpp"
#include "cogsim/errors.hpp"
#include "cogsim/experiment.hpp"
#include "cogsim/io.hpp"
#include "cogsim/markov.hpp"
#include "cogsim/protocols.hpp"
#include "cogsim/random.hpp"
#include "cogsim/stats.hpp"
#include "cogsim/traffic.hpp"
