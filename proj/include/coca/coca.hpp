#pragma once

#include "coca/affinity.hpp"
#include "coca/compactness.hpp"
#include "coca/config.hpp"
#include "coca/encoder.hpp"
#include "coca/error.hpp"
#include "coca/heatmap.hpp"
#include "coca/hierarchy.hpp"
#include "coca/image_io.hpp"
#include "coca/metrics.hpp"
#include "coca/parallel.hpp"
#include "coca/rng.hpp"
#include "coca/sbc.hpp"
#include "coca/scenegen.hpp"
#include "coca/tensor.hpp"
