#pragma once

namespace arc {

/// Keeps large freed blocks in the heap instead of returning them to the OS,
/// so per-batch tensors do not page-fault on every allocation. No-op outside
/// glibc.
void tune_allocator();

}  // namespace arc
