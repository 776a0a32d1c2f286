#pragma once

#include "stc/bench.hpp"
#include "stc/builtins.hpp"
#include "stc/channel.hpp"
#include "stc/composition.hpp"
#include "stc/core_model.hpp"
#include "stc/error.hpp"
#include "stc/fuzz.hpp"
#include "stc/parallel_exec.hpp"
#include "stc/program_io.hpp"
#include "stc/types.hpp"
#include "stc/value.hpp"
