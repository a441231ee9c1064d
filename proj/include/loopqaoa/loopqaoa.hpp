#pragma once

#include "loopqaoa/bench.hpp"
#include "loopqaoa/bfgs.hpp"
#include "loopqaoa/biasloop.hpp"
#include "loopqaoa/graph.hpp"
#include "loopqaoa/hamiltonian.hpp"
#include "loopqaoa/optimizer.hpp"
#include "loopqaoa/random.hpp"
#include "loopqaoa/simulator.hpp"
