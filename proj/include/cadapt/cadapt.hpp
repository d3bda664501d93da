#pragma once

#include "cadapt/error.hpp"
#include "cadapt/taxonomy.hpp"
#include "cadapt/linear_model.hpp"
#include "cadapt/cost_model.hpp"
#include "cadapt/best_response.hpp"
#include "cadapt/oracle.hpp"
#include "cadapt/flipset.hpp"
#include "cadapt/analysis.hpp"
#include "cadapt/random.hpp"
#include "cadapt/folds.hpp"
#include "cadapt/dataset.hpp"
#include "cadapt/toy.hpp"
#include "cadapt/objectives.hpp"
#include "cadapt/optimizer.hpp"
#include "cadapt/training.hpp"
#include "cadapt/evaluation.hpp"
#include "cadapt/serialization.hpp"
#include "cadapt/manifest.hpp"
