#pragma once

namespace densitree {

// Worker cap for OpenMP regions. 0 restores the runtime default.
void set_thread_count(int threads);
int thread_count();

}  // namespace densitree
