#pragma once

#include "toss/association.hpp"
#include "toss/box_fit.hpp"
#include "toss/config.hpp"
#include "toss/cost.hpp"
#include "toss/ds_voting.hpp"
#include "toss/export.hpp"
#include "toss/kalman.hpp"
#include "toss/kitti_io.hpp"
#include "toss/pipeline.hpp"
#include "toss/range_image.hpp"
#include "toss/rng.hpp"
#include "toss/segmentation.hpp"
#include "toss/synthetic.hpp"
#include "toss/tracker.hpp"
#include "toss/types.hpp"
#include "toss/voxel_map.hpp"
