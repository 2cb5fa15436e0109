#pragma once
// Umbrella header.

#include "tkge/checkpoint.hpp"
#include "tkge/core.hpp"
#include "tkge/dataset.hpp"
#include "tkge/date.hpp"
#include "tkge/evaluation.hpp"
#include "tkge/forecasting.hpp"
#include "tkge/gridsearch.hpp"
#include "tkge/lstm.hpp"
#include "tkge/models.hpp"
#include "tkge/tensors.hpp"
#include "tkge/training.hpp"
#include "tkge/vocab.hpp"
