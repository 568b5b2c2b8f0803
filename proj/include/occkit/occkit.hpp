#pragma once

#include "occkit/binary.hpp"
#include "occkit/bvh.hpp"
#include "occkit/evalmetrics.hpp"
#include "occkit/formats.hpp"
#include "occkit/gait.hpp"
#include "occkit/geometry.hpp"
#include "occkit/grid.hpp"
#include "occkit/grid_io.hpp"
#include "occkit/intersect.hpp"
#include "occkit/lidar.hpp"
#include "occkit/mesh_io.hpp"
#include "occkit/parallel.hpp"
#include "occkit/pipeline.hpp"
#include "occkit/quality.hpp"
#include "occkit/rectify.hpp"
#include "occkit/scene.hpp"
#include "occkit/synth.hpp"
#include "occkit/taxonomy.hpp"
#include "occkit/voxelizer.hpp"
