#pragma once

#include "geometry.hpp"
#include "dataset.hpp"
#include "oracles.hpp"
#include "kdtree.hpp"
#include "lsh.hpp"
#include "search.hpp"
#include "shell.hpp"
#include "adversarial.hpp"
#include "persistence.hpp"
#include "bench.hpp"
