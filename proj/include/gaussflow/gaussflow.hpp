#pragma once

#include "gaussflow/ambient.hpp"
#include "gaussflow/comparison.hpp"
#include "gaussflow/core.hpp"
#include "gaussflow/engine.hpp"
#include "gaussflow/harness.hpp"
#include "gaussflow/mesh.hpp"
#include "gaussflow/mesh_io.hpp"
#include "gaussflow/radial.hpp"
#include "gaussflow/shapes.hpp"
#include "gaussflow/trajectory_io.hpp"
