#pragma once

namespace adpp {

// Every data-parallel kernel takes one of these; Serial is the reference
// implementation the tests compare against. All item-level randomness is
// counter-based, so both modes produce bit-identical results.
enum class ExecMode { Serial, Parallel };

int hardware_threads();

}  // namespace adpp
