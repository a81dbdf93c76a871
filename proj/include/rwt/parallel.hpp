#pragma once

namespace rwt {

// Worker count used by the OpenMP kernels. Defaults to 1 so results are
// reproducible without opting in; every kernel is bit-identical across
// thread counts anyway.
void set_num_threads(int n);
int num_threads() noexcept;

}  // namespace rwt
