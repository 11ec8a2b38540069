#pragma once

#include <cstdint>
#include <functional>

namespace xugt {

// Worker count used by parallel_for.  Defaults to 1; results never depend on
// it because parallelism only partitions independent output elements.
int num_threads();
void set_num_threads(int n);

// Runs fn(begin, end) over a partition of [0, count).  Serial when count is
// small or one thread is configured.
void parallel_for(int64_t count, const std::function<void(int64_t, int64_t)>& fn);

namespace instr {

// When enabled, convolution kernels count one multiply-accumulate per kernel
// tap per output element, including taps that land in the zero padding.  That
// matches the nominal cost model (out_elems x c_in/groups x k_t*k_h*k_w), so
// the instrumented count can be compared to the analytic one exactly.
void enable_mac_counter(bool on);
bool mac_counter_enabled();
void reset_mac_counter();
uint64_t mac_count();
void add_macs(uint64_t n);

}  // namespace instr

}  // namespace xugt
