#pragma once

#include "config.hpp"
#include "constant_opt.hpp"
#include "distill.hpp"
#include "errors.hpp"
#include "evolve.hpp"
#include "expr.hpp"
#include "ga_ops.hpp"
#include "importance.hpp"
#include "loss.hpp"
#include "matrix.hpp"
#include "pareto.hpp"
#include "parse.hpp"
#include "pca.hpp"
#include "rng.hpp"
#include "run_manifest.hpp"
#include "simplify.hpp"
#include "slime.hpp"
#include "synth.hpp"
#include "table.hpp"
#include "transforms.hpp"
