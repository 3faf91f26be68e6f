#pragma once

#include "fracgraph/error.hpp"
#include "fracgraph/graph.hpp"
#include "fracgraph/spectral.hpp"
#include "fracgraph/kernel.hpp"
#include "fracgraph/calculus.hpp"
#include "fracgraph/variational.hpp"
#include "fracgraph/io.hpp"
