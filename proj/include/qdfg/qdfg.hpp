#pragma once

// Umbrella header: pulls in the whole library.

#include "qdfg/csv.hpp"
#include "qdfg/entity.hpp"
#include "qdfg/eval.hpp"
#include "qdfg/features.hpp"
#include "qdfg/forest.hpp"
#include "qdfg/graph.hpp"
#include "qdfg/ngram.hpp"
#include "qdfg/obfuscate.hpp"
#include "qdfg/parallel.hpp"
#include "qdfg/rng.hpp"
#include "qdfg/synth.hpp"
#include "qdfg/trace.hpp"
#include "qdfg/util.hpp"
