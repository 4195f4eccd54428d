#pragma once

#include "umetric/ball_tree.hpp"
#include "umetric/distortion.hpp"
#include "umetric/dvoretzky.hpp"
#include "umetric/embed.hpp"
#include "umetric/errors.hpp"
#include "umetric/gen.hpp"
#include "umetric/io.hpp"
#include "umetric/prng.hpp"
#include "umetric/space.hpp"
#include "umetric/tolerance.hpp"

