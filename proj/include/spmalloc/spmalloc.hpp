#pragma once

#include "spmalloc/access_expr.hpp"
#include "spmalloc/allocator.hpp"
#include "spmalloc/energy.hpp"
#include "spmalloc/error.hpp"
#include "spmalloc/memspec.hpp"
#include "spmalloc/pipeline.hpp"
#include "spmalloc/rational.hpp"
#include "spmalloc/simtrace.hpp"
#include "spmalloc/workload.hpp"
