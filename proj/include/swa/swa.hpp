#pragma once

#include "swa/core.hpp"
#include "swa/naive.hpp"
#include "swa/integral.hpp"
#include "swa/parallel.hpp"
#include "swa/image_io.hpp"
#include "swa/bench.hpp"
