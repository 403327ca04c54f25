#pragma once

#include "lsam/core.hpp"
#include "lsam/rng.hpp"
#include "lsam/parallel.hpp"
#include "lsam/problem.hpp"
#include "lsam/spectral.hpp"
#include "lsam/dynamics.hpp"
#include "lsam/theory.hpp"
#include "lsam/complexity.hpp"
#include "lsam/verify.hpp"
#include "lsam/io.hpp"
#include "lsam/cli.hpp"
