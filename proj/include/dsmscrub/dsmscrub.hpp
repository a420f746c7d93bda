// SPDX-License-Identifier: Apache-2.0
#pragma once

// Umbrella header.

#include "dsmscrub/camera.hpp"
#include "dsmscrub/core.hpp"
#include "dsmscrub/external_backend.hpp"
#include "dsmscrub/gltf_io.hpp"
#include "dsmscrub/image_io.hpp"
#include "dsmscrub/inpaint.hpp"
#include "dsmscrub/manifest.hpp"
#include "dsmscrub/mask.hpp"
#include "dsmscrub/mesh.hpp"
#include "dsmscrub/metrics.hpp"
#include "dsmscrub/mosaic.hpp"
#include "dsmscrub/parallel.hpp"
#include "dsmscrub/pipeline.hpp"
#include "dsmscrub/raster.hpp"
#include "dsmscrub/rasterize.hpp"
#include "dsmscrub/remesh.hpp"
#include "dsmscrub/retexture.hpp"
#include "dsmscrub/synth.hpp"
